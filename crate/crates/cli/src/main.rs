//! Command-line front end: device cards, cell testbenches, noise-margin
//! extraction and calibration, with CSV outputs.
//!
//! Exit codes: 0 pass, 1 testbench fail, 2 solver/analysis error, 64 usage.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use cntsram_core::analysis::{
    butterfly, measure_energy, run_testbench_with, snm_max_square, write_margin,
    write_trip_margin, Operation, ProtocolConfig, SnmMode, Verdict,
};
use cntsram_core::analysis::calibrate::{calibrate_4t, calibrate_5t};
use cntsram_core::cells::CellKind;
use cntsram_core::config::{parse_config, render_config, Config};
use cntsram_core::device::{cnt_diameter, threshold_voltage, Chirality, DeviceInstance, Polarity};
use cntsram_core::netlist::parse_netlist;
use cntsram_core::solver::{transient, SolverOptions};

const EXIT_FAIL: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "cntsram", version, about = "CNTFET SRAM cell simulator and characterization harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// key=value configuration file layered over the built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Supply override (V).
    #[arg(long)]
    vdd: Option<f64>,
    /// Write-assist boost fraction; enables assisted writes.
    #[arg(long)]
    assist: Option<f64>,
    /// Output directory for CSV files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed recorded for randomized property runs (outputs are
    /// deterministic for a fixed seed).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Print the device card for a chirality: diameter, threshold and
    /// per-tube on/off currents at vdd.
    Device {
        /// Chirality as m,n
        #[arg(long)]
        chirality: String,
        #[arg(long, default_value_t = 1)]
        tubes: u32,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run one cell testbench and write its trace CSV.
    Simulate {
        #[arg(long)]
        cell: Option<String>,
        /// write0 | write1 | read0 | read1 | hold
        #[arg(long)]
        op: Option<String>,
        /// Hold window override, e.g. 1u, 100n.
        #[arg(long)]
        duration: Option<String>,
        /// Simulate a netlist file instead of a library cell.
        #[arg(long)]
        netlist: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Extract noise margins; writes butterfly CSVs and a report.
    Snm {
        #[arg(long)]
        cell: Option<String>,
        /// hold | read | write
        #[arg(long)]
        mode: Option<String>,
        /// Run every cell and mode and print the comparison table.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep the calibrated protocol levels (4T idle biases, 5T precharge)
    /// and optionally write the resulting configuration file.
    Calibrate {
        /// 4t | 5t | all
        #[arg(long, default_value = "all")]
        cell: String,
        /// Write the calibrated configuration here.
        #[arg(long)]
        write_config: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn usage_err(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn load_config(common: &CommonArgs) -> Result<Config, String> {
    let mut cfg = Config::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        cfg = parse_config(&text, cfg).map_err(|e| e.to_string())?;
    }
    if let Some(v) = common.vdd {
        cfg.protocol.vdd = v;
    }
    if let Some(a) = common.assist {
        cfg.protocol.assist = true;
        cfg.protocol.write_assist_boost = a;
    }
    Ok(cfg)
}

fn parse_si(s: &str) -> Option<f64> {
    cntsram_core::netlist::parse_si_value(s)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_device(chirality: &str, tubes: u32, common: &CommonArgs) -> ExitCode {
    let cfg = match load_config(common) {
        Ok(c) => c,
        Err(e) => return usage_err(&e),
    };
    let mut it = chirality.splitn(2, ',');
    let (m, n) = match (
        it.next().and_then(|x| x.trim().parse::<u32>().ok()),
        it.next().and_then(|x| x.trim().parse::<u32>().ok()),
    ) {
        (Some(m), Some(n)) => (m, n),
        _ => return usage_err("chirality must be m,n (nonnegative integers)"),
    };
    let ch = match Chirality::new(m, n) {
        Ok(c) => c,
        Err(e) => return usage_err(&e.to_string()),
    };
    if tubes == 0 {
        return usage_err("tubes must be at least 1");
    }
    let params = Arc::new(cfg.params.clone());
    let k = &params.constants;
    let d = cnt_diameter(ch, k);
    let vth = threshold_voltage(d, k).expect("positive diameter");
    let dev = DeviceInstance::new(Polarity::N, ch, tubes, Arc::clone(&params)).expect("valid device");
    let vdd = cfg.protocol.vdd;
    println!("chirality=({m},{n}) tubes={tubes}");
    println!("d_cnt_nm={:.5}", d * 1e9);
    println!("vth_v={:.5}", vth);
    println!("i_on_per_tube_a={:.5e}", dev.on_current_per_tube(vdd));
    println!("i_off_per_tube_a={:.5e}", dev.off_current_per_tube(vdd));
    println!("i_on_a={:.5e}", dev.drain_current(vdd, vdd));
    println!("vdd_v={vdd}");
    ExitCode::SUCCESS
}

fn cmd_simulate(
    cell: Option<&str>,
    op: Option<&str>,
    duration: Option<&str>,
    netlist: Option<&Path>,
    common: &CommonArgs,
) -> ExitCode {
    let mut cfg = match load_config(common) {
        Ok(c) => c,
        Err(e) => return usage_err(&e),
    };
    if let Some(d) = duration {
        match parse_si(d) {
            Some(v) if v > 0.0 => cfg.protocol.hold_duration = v,
            _ => return usage_err("bad --duration"),
        }
    }
    let opts = SolverOptions::default();

    if let Some(path) = netlist {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return usage_err(&format!("cannot read {}: {e}", path.display())),
        };
        let params = Arc::new(cfg.params.clone());
        let circuit = match parse_netlist(&text, &params) {
            Ok(c) => c,
            Err(e) => return usage_err(&format!("netlist: {e}")),
        };
        let t_end = duration.and_then(parse_si).unwrap_or(10e-9);
        let trace = match transient(&circuit, t_end, &opts, None) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("solver error: {e}");
                return ExitCode::from(EXIT_SOLVER);
            }
        };
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("netlist");
        if let Err(e) = write_file(&common.out, &format!("{stem}_trace.csv"), &trace.to_csv()) {
            return usage_err(&e);
        }
        println!("verdict: Pass");
        return ExitCode::SUCCESS;
    }

    let (Some(cell), Some(op)) = (cell, op) else {
        return usage_err("simulate needs --cell and --op (or --netlist)");
    };
    let Some(kind) = CellKind::from_name(cell) else {
        return usage_err(&format!("unknown cell `{cell}`"));
    };
    let Some(operation) = Operation::from_name(op) else {
        return usage_err(&format!("unknown operation `{op}`"));
    };
    match run_testbench_with(kind, operation, &cfg.protocol, &opts, cfg.cell) {
        Ok(result) => {
            let name = format!("{}_{}_trace.csv", kind.name(), operation.name());
            if let Err(e) = write_file(&common.out, &name, &result.trace.to_csv()) {
                return usage_err(&e);
            }
            if matches!(operation, Operation::Write0 | Operation::Write1) {
                if let Ok(rep) =
                    measure_energy(&result.trace, (0.0, *result.trace.times.last().unwrap()))
                {
                    println!(
                        "energy_total_j={:.4e} bitline_fraction={:.3}",
                        rep.total, rep.bitline_fraction
                    );
                }
            }
            match &result.verdict {
                Verdict::Pass => {
                    println!("verdict: Pass");
                    ExitCode::SUCCESS
                }
                Verdict::Fail(why) => {
                    println!("verdict: Fail ({why})");
                    ExitCode::from(EXIT_FAIL)
                }
            }
        }
        Err(e) => {
            eprintln!("solver error: {e}");
            ExitCode::from(EXIT_SOLVER)
        }
    }
}

fn snm_one(
    kind: CellKind,
    mode: SnmMode,
    cfg: &ProtocolConfig,
    opts: &SolverOptions,
) -> Result<(String, Option<String>), String> {
    match mode {
        SnmMode::Hold | SnmMode::Read => {
            let curve = butterfly(kind, mode, cfg, opts).map_err(|e| e.to_string())?;
            let rep = snm_max_square(&curve);
            let line = format!(
                "cell={} mode={:?} snm_v={:.4} lobe_high_v={:.4} lobe_low_v={:.4}{}",
                kind.name(),
                mode,
                rep.snm,
                rep.lobe_high,
                rep.lobe_low,
                if rep.degenerate_eye { " degenerate" } else { "" }
            );
            Ok((line, Some(curve.to_csv())))
        }
        SnmMode::Write => {
            let rep = write_margin(kind, cfg, opts).map_err(|e| e.to_string())?;
            let trip = write_trip_margin(kind, cfg, opts).map_err(|e| e.to_string())?;
            let line = format!(
                "cell={} mode=Write margin_v={:.4} monostable={} trip_margin_v={:.4}",
                kind.name(),
                rep.snm,
                rep.monostable.unwrap_or(false),
                trip.margin
            );
            Ok((line, None))
        }
    }
}

fn cmd_snm(cell: Option<&str>, mode: Option<&str>, all: bool, common: &CommonArgs) -> ExitCode {
    let cfg = match load_config(common) {
        Ok(c) => c,
        Err(e) => return usage_err(&e),
    };
    let opts = SolverOptions::default();
    if all {
        // Independent (cell, mode) analyses fan out across threads; all
        // output goes through this single collector.
        let mut handles = Vec::new();
        for kind in CellKind::ALL {
            for mode in [SnmMode::Hold, SnmMode::Read, SnmMode::Write] {
                let cfgp = cfg.protocol.clone();
                let o = opts.clone();
                handles.push((
                    kind,
                    mode,
                    std::thread::spawn(move || snm_one(kind, mode, &cfgp, &o)),
                ));
            }
        }
        let mut rows = Vec::new();
        for (kind, mode, h) in handles {
            match h.join().expect("analysis thread") {
                Ok((line, _)) => rows.push(line),
                Err(e) => {
                    eprintln!("{}/{:?}: {e}", kind.name(), mode);
                    return ExitCode::from(EXIT_SOLVER);
                }
            }
        }
        let field = |row: &str, key: &str| {
            row.split_whitespace()
                .find_map(|t| t.strip_prefix(key).map(str::to_string))
                .unwrap_or_default()
        };
        let get = |kind: CellKind, mode: &str| {
            rows.iter()
                .find(|r| r.contains(&format!("cell={} mode={mode}", kind.name())))
                .cloned()
                .unwrap_or_default()
        };
        println!("cell        hold_v    read_v    write_v");
        let mut read_rows = Vec::new();
        let mut write_rows = Vec::new();
        for kind in CellKind::ALL {
            let read = field(&get(kind, "Read"), "snm_v=");
            let write = field(&get(kind, "Write"), "margin_v=");
            println!(
                "{:<10}  {:<8}  {:<8}  {:<8}",
                kind.name(),
                field(&get(kind, "Hold"), "snm_v="),
                read,
                write,
            );
            read_rows.push((kind.name().to_string(), read.parse().unwrap_or(0.0)));
            write_rows.push((kind.name().to_string(), write.parse().unwrap_or(0.0)));
        }
        let mut tables = String::new();
        tables.push_str(&cntsram_core::analysis::comparison_table("Read SNM (V)", &read_rows));
        tables.push('\n');
        tables.push_str(&cntsram_core::analysis::comparison_table("Write margin (V)", &write_rows));
        if let Err(e) = write_file(&common.out, "snm_comparison.txt", &tables) {
            return usage_err(&e);
        }
        return ExitCode::SUCCESS;
    }

    let (Some(cell), Some(mode)) = (cell, mode) else {
        return usage_err("snm needs --cell and --mode (or --all)");
    };
    let Some(kind) = CellKind::from_name(cell) else {
        return usage_err(&format!("unknown cell `{cell}`"));
    };
    let mode = match mode.to_ascii_lowercase().as_str() {
        "hold" => SnmMode::Hold,
        "read" => SnmMode::Read,
        "write" => SnmMode::Write,
        other => return usage_err(&format!("unknown mode `{other}`")),
    };
    match snm_one(kind, mode, &cfg.protocol, &opts) {
        Ok((line, csv)) => {
            println!("{line}");
            if let Some(csv) = csv {
                let name = format!(
                    "{}_{}_butterfly.csv",
                    kind.name(),
                    format!("{mode:?}").to_lowercase()
                );
                if let Err(e) = write_file(&common.out, &name, &csv) {
                    return usage_err(&e);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_SOLVER)
        }
    }
}

fn cmd_calibrate(cell: &str, write_config: Option<&Path>, common: &CommonArgs) -> ExitCode {
    let cfg = match load_config(common) {
        Ok(c) => c,
        Err(e) => return usage_err(&e),
    };
    let opts = SolverOptions::default();
    let mut out = cfg.clone();
    let report = |oc: &cntsram_core::analysis::calibrate::CalibrationOutcome| {
        let passing: Vec<String> = oc
            .points
            .iter()
            .filter(|(_, ok)| *ok)
            .map(|(v, _)| format!("{v:.3}"))
            .collect();
        println!(
            "{}: window={} midpoint={} passing=[{}]",
            oc.parameter,
            oc.window
                .map(|(a, b)| format!("[{a:.3}, {b:.3}]"))
                .unwrap_or_else(|| "none".into()),
            oc.midpoint.map(|m| format!("{m:.4}")).unwrap_or_else(|| "none".into()),
            passing.join(" ")
        );
    };
    let lc = cell.to_ascii_lowercase();
    if lc == "4t" || lc == "all" {
        match calibrate_4t(&cfg.protocol, &opts) {
            Ok((idle2, idle1, calibrated)) => {
                report(&idle2);
                report(&idle1);
                out.protocol.v_idle1 = calibrated.v_idle1;
                out.protocol.v_idle2 = calibrated.v_idle2;
            }
            Err(e) => {
                eprintln!("calibration error: {e}");
                return ExitCode::from(EXIT_SOLVER);
            }
        }
    }
    if lc == "5t" || lc == "all" {
        match calibrate_5t(&cfg.protocol, &opts) {
            Ok((pc, calibrated)) => {
                report(&pc);
                out.protocol.v_pc = calibrated.v_pc;
            }
            Err(e) => {
                eprintln!("calibration error: {e}");
                return ExitCode::from(EXIT_SOLVER);
            }
        }
    }
    if !["4t", "5t", "all"].contains(&lc.as_str()) {
        return usage_err("calibrate --cell must be 4t, 5t or all");
    }
    println!(
        "calibrated: v_idle1_v={:.4} v_idle2_v={:.4} v_pc_v={:.4}",
        out.protocol.v_idle1, out.protocol.v_idle2, out.protocol.v_pc
    );
    if let Some(path) = write_config {
        if let Err(e) = std::fs::write(path, render_config(&out)) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_SOLVER);
        }
        println!("wrote {}", path.display());
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    // Die quietly when stdout is a closed pipe (`cntsram ... | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help/version requests are not usage errors.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match &cli.command {
        Command::Device { chirality, tubes, common } => cmd_device(chirality, *tubes, common),
        Command::Simulate { cell, op, duration, netlist, common } => cmd_simulate(
            cell.as_deref(),
            op.as_deref(),
            duration.as_deref(),
            netlist.as_deref(),
            common,
        ),
        Command::Snm { cell, mode, all, common } => {
            cmd_snm(cell.as_deref(), mode.as_deref(), *all, common)
        }
        Command::Calibrate { cell, write_config, common } => {
            cmd_calibrate(cell, write_config.as_deref(), common)
        }
    }
}
