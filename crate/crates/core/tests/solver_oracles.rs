//! Solver checks against independent oracles: finite-difference Jacobians,
//! bistability from opposing guesses, and sweep reversibility.

use std::sync::Arc;

use cntsram_core::cells::{build_cell, default_sizing, CellKind};
use cntsram_core::device::CntfetParams;
use cntsram_core::netlist::{Circuit, CircuitBuilder, NodeId};
use cntsram_core::solver::stamp::Assembler;
use cntsram_core::solver::{dc_operating_point, dc_sweep, kcl_residual, SolverOptions};
use cntsram_core::waveform::Waveform;

fn params() -> Arc<CntfetParams> {
    Arc::new(CntfetParams::default())
}

/// Hold-mode 6T: word line low, bit lines precharged high, supply on.
fn hold_6t() -> Circuit {
    let cell = build_cell(CellKind::Sram6T, &default_sizing(CellKind::Sram6T), &params()).unwrap();
    bias_cell(cell, &[("VDD", 0.9), ("WL", 0.0), ("BL", 0.9), ("BLB", 0.9)])
}

fn bias_cell(cell: Circuit, levels: &[(&str, f64)]) -> Circuit {
    let mut b = CircuitBuilder::new();
    let mut map = std::collections::BTreeMap::new();
    for e in &cell.elements {
        let terms: Vec<NodeId> = e
            .terminals
            .iter()
            .map(|t| {
                if t.is_ground() {
                    NodeId::GROUND
                } else {
                    *map.entry(t.0)
                        .or_insert_with(|| b.node(cell.node_name(*t).unwrap_or(&format!("n{}", t.0))))
                }
            })
            .collect();
        match &e.value {
            cntsram_core::netlist::ElementValue::Cntfet(d) => {
                b.add_cntfet(&e.label, terms[0], terms[1], terms[2], d.clone());
            }
            cntsram_core::netlist::ElementValue::Resistance(r) => {
                b.add_resistor(&e.label, terms[0], terms[1], *r);
            }
            cntsram_core::netlist::ElementValue::Capacitance(c) => {
                b.add_capacitor(&e.label, terms[0], terms[1], *c);
            }
            cntsram_core::netlist::ElementValue::Source(w) => {
                b.add_vsource(&e.label, terms[0], terms[1], w.clone());
            }
        }
    }
    for (name, node) in &cell.ports {
        if let Some(n) = map.get(&node.0) {
            b.add_port(name, *n);
        }
    }
    for (port, v) in levels {
        let n = b.node(port);
        b.add_vsource(&format!("V{port}"), n, NodeId::GROUND, Waveform::Dc(*v));
    }
    b.build().unwrap()
}

fn guess_for(c: &Circuit, q: f64, qb: f64, vdd: f64) -> Vec<f64> {
    let mut g = vec![0.0; c.node_count];
    if let Some(n) = c.port("Q") {
        g[n.0] = q;
    }
    if let Some(n) = c.port("QB") {
        g[n.0] = qb;
    }
    if let Some(n) = c.port("VDD") {
        g[n.0] = vdd;
    }
    for port in ["BL", "BLB"] {
        if let Some(n) = c.port(port) {
            g[n.0] = vdd;
        }
    }
    g
}

#[test]
fn six_t_hold_is_bistable() {
    let c = hold_6t();
    let opts = SolverOptions::default();
    let q = c.port("Q").unwrap();
    let qb = c.port("QB").unwrap();

    let hi = dc_operating_point(&c, &opts, Some(&guess_for(&c, 0.9, 0.0, 0.9))).unwrap();
    assert!(hi.voltage(q) >= 0.8, "Q = {}", hi.voltage(q));
    assert!(hi.voltage(qb) <= 0.1, "QB = {}", hi.voltage(qb));

    let lo = dc_operating_point(&c, &opts, Some(&guess_for(&c, 0.0, 0.9, 0.9))).unwrap();
    assert!(lo.voltage(q) <= 0.1, "Q = {}", lo.voltage(q));
    assert!(lo.voltage(qb) >= 0.8, "QB = {}", lo.voltage(qb));

    assert!(kcl_residual(&c, &hi) <= opts.i_abstol);
    assert!(kcl_residual(&c, &lo) <= opts.i_abstol);
}

/// Assembled Jacobian against central finite differences of the residual,
/// at a randomized state of the biased 6T cell.
#[test]
fn six_t_jacobian_matches_finite_differences() {
    let c = hold_6t();
    let mut asm = Assembler::new(&c);
    let n = asm.layout.n_unknowns();
    let n_free = asm.layout.n_free;
    let source_vals: Vec<f64> = c
        .elements
        .iter()
        .filter_map(|e| match &e.value {
            cntsram_core::netlist::ElementValue::Source(w) => Some(w.dc_value()),
            _ => None,
        })
        .collect();

    let mut state = 0x1234_5678_9abc_def0u64;
    let mut rnd = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 0.9
    };
    let mut x = vec![0.0; n];
    for v in x.iter_mut().take(n_free) {
        *v = rnd();
    }

    asm.assemble(&x, &source_vals, None, 0.0);
    let jac = asm.jac.clone();
    let h = 1e-7;
    for col in 0..n {
        let mut xp = x.clone();
        xp[col] += h;
        asm.assemble(&xp, &source_vals, None, 0.0);
        let fp = asm.res.clone();
        let mut xm = x.clone();
        xm[col] -= h;
        asm.assemble(&xm, &source_vals, None, 0.0);
        let fm = asm.res.clone();
        for row in 0..n {
            let fd = (fp[row] - fm[row]) / (2.0 * h);
            let a = jac.get(row, col);
            let denom = a.abs().max(1e-7);
            assert!(
                (a - fd).abs() / denom <= 1e-5 || (a - fd).abs() < 1e-12,
                "J[{row}][{col}] = {a}, fd = {fd}"
            );
        }
    }
}

/// A non-hysteretic single-inverter sweep must retrace itself backwards.
#[test]
fn sweep_reverses_cleanly() {
    let p = params();
    let mut b = CircuitBuilder::new();
    let vin = b.node("vin");
    let out = b.node("out");
    let vdd = b.node("vdd");
    let dn = cntsram_core::device::DeviceInstance::new(
        cntsram_core::device::Polarity::N,
        cntsram_core::device::Chirality::new(19, 0).unwrap(),
        3,
        Arc::clone(&p),
    )
    .unwrap();
    let dp = cntsram_core::device::DeviceInstance::new(
        cntsram_core::device::Polarity::P,
        cntsram_core::device::Chirality::new(19, 0).unwrap(),
        3,
        Arc::clone(&p),
    )
    .unwrap();
    b.add_cntfet("MN", out, vin, NodeId::GROUND, dn);
    b.add_cntfet("MP", out, vin, vdd, dp);
    b.add_vsource("VIN", vin, NodeId::GROUND, Waveform::Dc(0.0));
    b.add_vsource("VDD", vdd, NodeId::GROUND, Waveform::Dc(0.9));
    b.add_port("OUT", out);
    let c = b.build().unwrap();

    let opts = SolverOptions::default();
    let fwd = dc_sweep(&c, "VIN", 0.0, 0.9, 0.01, &opts).unwrap();
    let bwd = dc_sweep(&c, "VIN", 0.9, 0.0, 0.01, &opts).unwrap();
    let out_node = c.port("OUT").unwrap();

    // Monotone non-increasing output on the forward sweep.
    for w in fwd.windows(2) {
        assert!(w[1].1.voltage(out_node) <= w[0].1.voltage(out_node) + 1e-9);
    }
    for (f, b_) in fwd.iter().zip(bwd.iter().rev()) {
        assert!((f.0 - b_.0).abs() < 1e-12);
        let dv = (f.1.voltage(out_node) - b_.1.voltage(out_node)).abs();
        assert!(dv <= 2.0 * opts.v_abstol, "hysteresis {dv} at {}", f.0);
    }
}

/// Trapezoidal charge conservation: the source charge delivered into a pure
/// RC equals C * dV within 0.5%.
#[test]
fn rc_source_charge_matches_cap_charge() {
    let (r, c) = (1e3, 10e-15);
    let rc = r * c;
    let mut b = CircuitBuilder::new();
    let vin = b.node("vin");
    let out = b.node("out");
    b.add_vsource(
        "V1",
        vin,
        NodeId::GROUND,
        Waveform::Pwl(vec![(0.0, 0.0), (rc / 1000.0, 0.9)]),
    );
    b.add_resistor("R1", vin, out, r);
    b.add_capacitor("C1", out, NodeId::GROUND, c);
    b.add_port("OUT", out);
    let circ = b.build().unwrap();
    let opts = SolverOptions { dt: rc / 200.0, ..Default::default() };
    let trace = cntsram_core::solver::transient(&circ, 15.0 * rc, &opts, None).unwrap();
    let mut charge = 0.0;
    for i in 0..trace.times.len() - 1 {
        let dt = trace.times[i + 1] - trace.times[i];
        charge += 0.5 * (trace.source_currents[i][0] + trace.source_currents[i + 1][0]) * dt;
    }
    let out_node = circ.port("OUT").unwrap();
    let dv = trace.node_voltages.last().unwrap()[out_node.0] - trace.node_voltages[0][out_node.0];
    let want = c * dv;
    assert!(
        ((charge - want) / want).abs() <= 5e-3,
        "charge {charge:.3e} C vs C*dV {want:.3e} C"
    );
}

/// A lone voltage source row pins its node exactly.
#[test]
fn source_row_pins_node() {
    let mut b = CircuitBuilder::new();
    let a = b.node("a");
    b.add_vsource("V1", a, NodeId::GROUND, Waveform::Dc(0.9));
    b.add_resistor("R1", a, NodeId::GROUND, 1e3);
    let c = b.build().unwrap();
    let sol = dc_operating_point(&c, &SolverOptions::default(), None).unwrap();
    assert!((sol.node_voltages[1] - 0.9).abs() < 1e-12);
}
