//! Functional read/write/hold testbenches.
//!
//! The bench wraps one cell with:
//!
//! * ideal sources behind a 1 kOhm driver resistance on data bit lines
//!   (so bit-line swing energy dissipates the way a real driver's output
//!   stage would, instead of being silently recovered by an ideal source);
//! * direct ideal sources on word lines, control lines and VDD;
//! * a PMOS precharge switch per floating read line, fed from its own rail
//!   source and gated by the sequence's `PRE` waveform.
//!
//! Verdicts:
//!
//! * Write: the stored node must land within 10% of the written rail at the
//!   end of the sequence, and the operating point of the idle-configured
//!   circuit, re-solved from the final state, must retain it.
//! * Read: the sensed line(s) must develop at least 50 mV in the expected
//!   direction by the sense instant (or hold within 50 mV for the
//!   non-discharging data value), and the storage nodes must return to
//!   within 10% of their pre-access values.
//! * Hold: both stored states must stay within 10% of their rails over the
//!   whole window.

use std::sync::Arc;

use crate::cells::{build_cell_with, CellBuildOptions, CellKind};
use crate::device::{Chirality, CntfetParams, DeviceInstance, Polarity};
use crate::netlist::{Circuit, CircuitBuilder, NodeId};
use crate::solver::{dc_operating_point, transient, DcSolution, SolverOptions, TransientTrace};
use crate::waveform::Waveform;

use super::protocol::{build_protocol, FloatingLine, ReadExpectation, StimulusSequence};
use super::{AnalysisError, Operation, ProtocolConfig};

/// Output impedance of the bit-line data drivers (Ohm).
pub const DRIVER_RES: f64 = 1e3;

/// Tube count of the testbench precharge switches.
pub const PRECHARGE_TUBES: u32 = 8;

/// Minimum single-ended or differential development at the sense instant (V).
pub const SENSE_MARGIN: f64 = 0.05;

/// Ports that count as data bit lines and get a driver resistance.
const BITLINE_PORTS: [&str; 7] = ["BL", "BLB", "WBL", "WBLB", "WriteBit", "ReadBit", "RBL"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(String),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

#[derive(Debug)]
pub struct TestbenchResult {
    pub verdict: Verdict,
    pub trace: TransientTrace,
    pub circuit: Circuit,
    pub sequence: StimulusSequence,
}

/// Builds the bench circuit for a sequence: cell plus sources, driver
/// resistances and precharge switches.
pub fn bench_circuit(
    kind: CellKind,
    seq: &StimulusSequence,
    params: &Arc<CntfetParams>,
    cell_opts: CellBuildOptions,
) -> Result<Circuit, AnalysisError> {
    let cell = build_cell_with(kind, &crate::cells::default_sizing(kind), params, cell_opts)?;
    let mut b = CircuitBuilder::from_circuit(&cell);
    for (port, wave) in &seq.waves {
        let node = b.node(port);
        if BITLINE_PORTS.contains(&port.as_str()) {
            let src = b.node(&format!("{port}_drv"));
            b.add_vsource(&format!("V{port}"), src, NodeId::GROUND, wave.clone());
            b.add_resistor(&format!("R{port}"), src, node, DRIVER_RES);
        } else {
            b.add_vsource(&format!("V{port}"), node, NodeId::GROUND, wave.clone());
        }
    }
    for FloatingLine { port, level } in &seq.floating {
        let line = b.node(port);
        let rail = b.node(&format!("{port}_rail"));
        let gate = b.node("PRE");
        let dev = DeviceInstance::new(
            Polarity::P,
            Chirality::new(19, 0).unwrap(),
            PRECHARGE_TUBES,
            Arc::clone(params),
        )
        .map_err(crate::cells::CellError::from)?;
        b.add_cntfet(&format!("MPRE{port}"), line, gate, rail, dev);
        b.add_vsource(&format!("V{port}PRE"), rail, NodeId::GROUND, Waveform::Dc(*level));
    }
    Ok(b.build()?)
}

/// Initial-state guess: storage nodes at the rails for `bit`, driven ports
/// at their t = 0 levels, floating lines at their precharge levels.
fn state_guess(circuit: &Circuit, seq: &StimulusSequence, vdd: f64, bit: bool) -> Vec<f64> {
    let mut g = vec![0.0; circuit.node_count];
    let set = |g: &mut Vec<f64>, name: &str, v: f64| {
        if let Some(n) = circuit.node_by_name(name) {
            g[n.0] = v;
        }
    };
    let q = if bit { vdd } else { 0.0 };
    set(&mut g, "Q", q);
    set(&mut g, "QB", vdd - q);
    // Internal feedback node of the 7T cell follows Q through M7.
    set(&mut g, "Q1", q);
    for (port, wave) in &seq.waves {
        let v = wave.value_at(0.0);
        set(&mut g, port, v);
        set(&mut g, &format!("{port}_drv"), v);
    }
    for fl in &seq.floating {
        set(&mut g, &fl.port, fl.level);
        set(&mut g, &format!("{}_rail", fl.port), fl.level);
    }
    g
}

fn effective_dt(opts: &SolverOptions, t_end: f64) -> f64 {
    opts.dt.max(t_end / 5000.0)
}

/// Runs the `(kind, op)` testbench and evaluates its verdict.
pub fn run_testbench(
    kind: CellKind,
    op: Operation,
    cfg: &ProtocolConfig,
    opts: &SolverOptions,
) -> Result<TestbenchResult, AnalysisError> {
    run_testbench_with(kind, op, cfg, opts, CellBuildOptions::default())
}

pub fn run_testbench_with(
    kind: CellKind,
    op: Operation,
    cfg: &ProtocolConfig,
    opts: &SolverOptions,
    cell_opts: CellBuildOptions,
) -> Result<TestbenchResult, AnalysisError> {
    match op {
        Operation::Hold => {
            // A hold must retain both states; run the '1' side last so its
            // trace (the interesting one for leakage-retained cells) is the
            // one returned.
            let r0 = run_single(kind, op, cfg, opts, cell_opts, false)?;
            if !r0.verdict.passed() {
                return Ok(r0);
            }
            run_single(kind, op, cfg, opts, cell_opts, true)
        }
        _ => {
            let bit = op.bit().unwrap();
            let start = match op {
                Operation::Write0 | Operation::Write1 => !bit,
                _ => bit,
            };
            run_single(kind, op, cfg, opts, cell_opts, start)
        }
    }
}

fn run_single(
    kind: CellKind,
    op: Operation,
    cfg: &ProtocolConfig,
    opts: &SolverOptions,
    cell_opts: CellBuildOptions,
    start_bit: bool,
) -> Result<TestbenchResult, AnalysisError> {
    let seq = build_protocol(kind, op, cfg)?;
    let circuit = bench_circuit(kind, &seq, &Arc::new(CntfetParams::default()), cell_opts)?;
    run_prepared(kind, op, cfg, opts, seq, circuit, start_bit)
}

pub(crate) fn run_prepared(
    _kind: CellKind,
    op: Operation,
    cfg: &ProtocolConfig,
    opts: &SolverOptions,
    seq: StimulusSequence,
    circuit: Circuit,
    start_bit: bool,
) -> Result<TestbenchResult, AnalysisError> {
    let guess = state_guess(&circuit, &seq, cfg.vdd, start_bit);
    let initial = dc_operating_point(&circuit, opts, Some(&guess))?;

    let mut topts = opts.clone();
    topts.dt = effective_dt(opts, seq.t_end);
    let trace = transient(&circuit, seq.t_end, &topts, Some(&initial))?;

    let q = circuit.port("Q").expect("cells expose Q");
    let qb = circuit.port("QB").expect("cells expose QB");
    let vdd = cfg.vdd;
    let tol = 0.1 * vdd;
    let last = trace.node_voltages.len() - 1;

    let verdict = match op {
        Operation::Hold => {
            let q0 = trace.node_voltages[0][q.0];
            let qb0 = trace.node_voltages[0][qb.0];
            let mut fail = None;
            for (i, row) in trace.node_voltages.iter().enumerate() {
                if (row[q.0] - q0).abs() > tol || (row[qb.0] - qb0).abs() > tol {
                    fail = Some(format!(
                        "state moved at t = {:.3e} s (Q {:.3} -> {:.3}, QB {:.3} -> {:.3})",
                        trace.times[i], q0, row[q.0], qb0, row[qb.0]
                    ));
                    break;
                }
            }
            match fail {
                None => Verdict::Pass,
                Some(msg) => Verdict::Fail(format!("hold({start_bit}): {msg}")),
            }
        }
        Operation::Write0 | Operation::Write1 => {
            let bit = op.bit().unwrap();
            let target = if bit { vdd } else { 0.0 };
            let q_end = trace.node_voltages[last][q.0];
            let qb_end = trace.node_voltages[last][qb.0];
            if (q_end - target).abs() > tol {
                Verdict::Fail(format!("Q ended at {q_end:.3} V, target {target:.1} V"))
            } else if (qb_end - (vdd - target)).abs() > tol {
                Verdict::Fail(format!("QB ended at {qb_end:.3} V"))
            } else {
                // Post-idle retention: re-solve the DC point with every
                // source at its end-of-sequence level, starting from the
                // final transient state.
                let mut idle_circ = circuit.clone();
                for (port, wave) in &seq.waves {
                    let v_end = wave.value_at(seq.t_end);
                    idle_circ.set_source_value(&format!("V{port}"), Waveform::Dc(v_end));
                }
                let final_guess = trace.node_voltages[last].clone();
                let dc = dc_operating_point(&idle_circ, opts, Some(&final_guess))?;
                let q_dc = dc.voltage(q);
                if (q_dc - target).abs() > tol {
                    Verdict::Fail(format!("post-idle DC lost the bit: Q = {q_dc:.3} V"))
                } else {
                    Verdict::Pass
                }
            }
        }
        Operation::Read0 | Operation::Read1 => {
            let sense_t = seq.sense_time.unwrap();
            let si = trace.index_at(sense_t);
            let expect = seq.read_expectation.as_ref().unwrap();
            let val = |port: &str, i: usize| -> f64 {
                let n = trace.port_node(port).expect("sensed port");
                trace.node_voltages[i][n.0]
            };
            let sense = match expect {
                ReadExpectation::Differential { high, low } => {
                    let d = val(high, si) - val(low, si);
                    if d >= SENSE_MARGIN {
                        None
                    } else {
                        Some(format!("{high}-{low} separation {d:.4} V < {SENSE_MARGIN} V"))
                    }
                }
                ReadExpectation::SingleEnded { line, reference, rises } => {
                    let d = val(line, si) - reference;
                    let ok = if *rises { d >= SENSE_MARGIN } else { -d >= SENSE_MARGIN };
                    if ok {
                        None
                    } else {
                        Some(format!("{line} moved {d:.4} V from {reference:.2} V"))
                    }
                }
                ReadExpectation::Stay { line, reference } => {
                    let d = (val(line, si) - reference).abs();
                    if d <= SENSE_MARGIN {
                        None
                    } else {
                        Some(format!("{line} strayed {d:.4} V from {reference:.2} V"))
                    }
                }
            };
            match sense {
                Some(msg) => Verdict::Fail(format!("sense: {msg}")),
                None => {
                    // Non-destructive read: storage returns to its pre-access
                    // values by the end of the sequence.
                    let q0 = trace.node_voltages[0][q.0];
                    let qb0 = trace.node_voltages[0][qb.0];
                    let dq = (trace.node_voltages[last][q.0] - q0).abs();
                    let dqb = (trace.node_voltages[last][qb.0] - qb0).abs();
                    if dq > tol || dqb > tol {
                        Verdict::Fail(format!(
                            "destructive read: dQ = {dq:.3} V, dQB = {dqb:.3} V"
                        ))
                    } else {
                        Verdict::Pass
                    }
                }
            }
        }
    };
    Ok(TestbenchResult { verdict, trace, circuit, sequence: seq })
}

/// Convenience: post-write retention oracle used by tests. Solves the idle
/// operating point of `kind` from both rails and returns the two Q voltages.
pub fn bistable_q_pair(
    kind: CellKind,
    cfg: &ProtocolConfig,
    opts: &SolverOptions,
) -> Result<(f64, f64, DcSolution, DcSolution), AnalysisError> {
    let seq = build_protocol(kind, Operation::Hold, cfg)?;
    let circuit = bench_circuit(kind, &seq, &Arc::new(CntfetParams::default()), Default::default())?;
    let q = circuit.port("Q").unwrap();
    let hi = dc_operating_point(&circuit, opts, Some(&state_guess(&circuit, &seq, cfg.vdd, true)))?;
    let lo = dc_operating_point(&circuit, opts, Some(&state_guess(&circuit, &seq, cfg.vdd, false)))?;
    Ok((hi.voltage(q), lo.voltage(q), hi, lo))
}
