//! Development survey: functionality verdicts, noise margins and write
//! margins for every cell at the default configuration.

use cntsram_core::analysis::{
    butterfly, run_testbench, snm_max_square, write_margin, Operation, ProtocolConfig, SnmMode,
};
use cntsram_core::cells::CellKind;
use cntsram_core::solver::SolverOptions;

fn main() {
    let cfg = ProtocolConfig::default();
    let opts = SolverOptions::default();

    println!("== functionality ==");
    for kind in CellKind::ALL {
        print!("{:>4}:", kind.name());
        for op in Operation::ALL {
            let t0 = std::time::Instant::now();
            let tag = match run_testbench(kind, op, &cfg, &opts) {
                Ok(r) => {
                    if r.verdict.passed() {
                        format!("{} ok", op.name())
                    } else {
                        format!("{} FAIL[{:?}]", op.name(), r.verdict)
                    }
                }
                Err(e) => format!("{} ERR[{e}]", op.name()),
            };
            print!("  {tag} ({} ms)", t0.elapsed().as_millis());
        }
        println!();
    }

    println!("== snm ==");
    for kind in CellKind::ALL {
        let mut row = format!("{:>4}:", kind.name());
        for mode in [SnmMode::Hold, SnmMode::Read] {
            match butterfly(kind, mode, &cfg, &opts) {
                Ok(curve) => {
                    let rep = snm_max_square(&curve);
                    row.push_str(&format!(
                        "  {mode:?}: snm={:.4} hi={:.4} lo={:.4}",
                        rep.snm, rep.lobe_high, rep.lobe_low
                    ));
                }
                Err(e) => row.push_str(&format!("  {mode:?}: ERR[{e}]")),
            }
        }
        println!("{row}");
    }

    println!("== write margin (no assist) ==");
    for kind in CellKind::ALL {
        match write_margin(kind, &cfg, &opts) {
            Ok(rep) => println!(
                "{:>4}: margin={:.4} mono={:?} hi={:.4} lo={:.4}",
                kind.name(),
                rep.snm,
                rep.monostable,
                rep.lobe_high,
                rep.lobe_low
            ),
            Err(e) => println!("{:>4}: ERR[{e}]", kind.name()),
        }
    }

    println!("== write margin (assist 0.30) ==");
    let mut acfg = cfg.clone();
    acfg.assist = true;
    for kind in [CellKind::Sram8T, CellKind::Sram9T, CellKind::Sram10T] {
        match write_margin(kind, &acfg, &opts) {
            Ok(rep) => println!(
                "{:>4}: margin={:.4} mono={:?}",
                kind.name(),
                rep.snm,
                rep.monostable
            ),
            Err(e) => println!("{:>4}: ERR[{e}]", kind.name()),
        }
    }

    println!("== write trip margin ==");
    for kind in CellKind::ALL {
        let no = cntsram_core::analysis::write_trip_margin(kind, &cfg, &opts);
        let yes = cntsram_core::analysis::write_trip_margin(kind, &acfg, &opts);
        match (no, yes) {
            (Ok(n), Ok(y)) => println!(
                "{:>4}: no-assist margin={:.4} trips={:?}  assist margin={:.4}",
                kind.name(),
                n.margin,
                n.trips.map(|t| t.map(|v| (v * 1e3).round() / 1e3)),
                y.margin
            ),
            (e1, e2) => println!("{:>4}: ERR {:?} {:?}", kind.name(), e1.err().map(|e| e.to_string()), e2.err().map(|e| e.to_string())),
        }
    }
}
