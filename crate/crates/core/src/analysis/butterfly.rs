//! Butterfly-curve extraction and write margins.
//!
//! An ideal injection source at one storage node breaks the cross-coupled
//! loop there (the source absorbs the feedback drive), so sweeping it while
//! recording the opposite node yields the loaded transfer curve of one
//! inverter under the chosen bias. Doing it from both storage nodes in turn
//! gives the two wings of the butterfly.

use std::sync::Arc;

use crate::cells::{build_cell, default_sizing, CellKind};
use crate::device::CntfetParams;
use crate::netlist::{Circuit, CircuitBuilder, NodeId};
use crate::solver::{dc_sweep, SolverOptions};
use crate::waveform::Waveform;

use super::protocol::idle_levels;
use super::snm::{snm_max_square, ButterflyCurve, SnmMode, SnmReport};
use super::{AnalysisError, ProtocolConfig};

/// Sweep resolution of the injected node voltage (V).
pub const SWEEP_STEP: f64 = 1e-3;

/// Port bias levels for a butterfly measurement.
fn bias_for(
    kind: CellKind,
    mode: SnmMode,
    attack: Option<bool>,
    cfg: &ProtocolConfig,
) -> Vec<(String, f64)> {
    let v = cfg.vdd;
    let mut levels: Vec<(String, f64)> = idle_levels(kind, cfg)
        .into_iter()
        .map(|(p, l)| (p.to_string(), l))
        .collect();
    let set = |port: &str, val: f64, levels: &mut Vec<(String, f64)>| {
        if let Some(e) = levels.iter_mut().find(|(p, _)| p == port) {
            e.1 = val;
        } else {
            levels.push((port.to_string(), val));
        }
    };
    match mode {
        SnmMode::Hold => {}
        SnmMode::Read => match kind {
            CellKind::Sram4T => set("WL2", 0.0, &mut levels),
            CellKind::Sram5T => set("WL", v, &mut levels),
            CellKind::Sram6T => set("WL", v, &mut levels),
            CellKind::Sram7T => set("ReadSelect", v, &mut levels),
            CellKind::Sram8T => set("RWL", v, &mut levels),
            CellKind::Sram9T => set("RWL", v, &mut levels),
            CellKind::Sram10T => {
                set("WL", v, &mut levels);
                set("Vgnd", 0.0, &mut levels);
            }
        },
        SnmMode::Write => {
            let bit = attack.unwrap_or(false);
            let data = if bit { v } else { 0.0 };
            // Static margins compare assist on/off, so the boost applies
            // only when explicitly enabled (the transient protocols always
            // assist the 10T cell, which is designed around it).
            let boost = if cfg.assist { cfg.write_assist_boost } else { 0.0 };
            let wv = v * (1.0 + boost);
            match kind {
                CellKind::Sram4T => {
                    set("BLB", v - data, &mut levels);
                    set("WL1", wv, &mut levels);
                }
                CellKind::Sram5T => {
                    set("BL", data, &mut levels);
                    set("WL", wv, &mut levels);
                }
                CellKind::Sram6T => {
                    set("BL", data, &mut levels);
                    set("BLB", v - data, &mut levels);
                    set("WL", wv, &mut levels);
                }
                CellKind::Sram7T => {
                    // Static margin with the feedback connected; the real
                    // write protocol cuts it, which has no static butterfly.
                    set("WriteBit", data, &mut levels);
                    set("WriteSelect", wv, &mut levels);
                }
                CellKind::Sram8T => {
                    set("WBL", data, &mut levels);
                    set("WBLB", v - data, &mut levels);
                    set("WWL", wv, &mut levels);
                }
                CellKind::Sram9T => {
                    set("WBL", data, &mut levels);
                    set("WWL", wv, &mut levels);
                }
                CellKind::Sram10T => {
                    set("BL", data, &mut levels);
                    set("BLB", v - data, &mut levels);
                    set("WL", wv, &mut levels);
                    set("WWL", wv, &mut levels);
                    // Assisted writes also float (collapse) the cell supply.
                    set("VDD", cfg.collapsed_vdd(boost), &mut levels);
                }
            }
        }
    }
    levels
}

fn biased_cell(
    kind: CellKind,
    levels: &[(String, f64)],
    params: &Arc<CntfetParams>,
) -> Result<Circuit, AnalysisError> {
    let cell = build_cell(kind, &default_sizing(kind), params)?;
    let mut b = CircuitBuilder::from_circuit(&cell);
    for (port, level) in levels {
        let n = b.node(port);
        b.add_vsource(&format!("V{port}"), n, NodeId::GROUND, Waveform::Dc(*level));
    }
    Ok(b.build()?)
}

/// One voltage-transfer curve: inject at `inject`, record `measure`.
fn vtc(
    base: &Circuit,
    inject: &str,
    measure: &str,
    vdd: f64,
    step: f64,
    opts: &SolverOptions,
) -> Result<Vec<(f64, f64)>, AnalysisError> {
    let mut b = CircuitBuilder::from_circuit(base);
    let inj = b.node(inject);
    b.add_vsource("VINJ", inj, NodeId::GROUND, Waveform::Dc(0.0));
    let circ = b.build()?;
    let meas = circ.port(measure).expect("storage port");
    let pts = dc_sweep(&circ, "VINJ", 0.0, vdd, step, opts)?;
    Ok(pts.into_iter().map(|(v, sol)| (v, sol.voltage(meas))).collect())
}

fn butterfly_with_attack(
    kind: CellKind,
    mode: SnmMode,
    attack: Option<bool>,
    cfg: &ProtocolConfig,
    opts: &SolverOptions,
    step: f64,
) -> Result<ButterflyCurve, AnalysisError> {
    cfg.validate()?;
    let params = Arc::new(CntfetParams::default());
    let levels = bias_for(kind, mode, attack, cfg);
    let base = biased_cell(kind, &levels, &params)?;
    let forward = vtc(&base, "Q", "QB", cfg.vdd, step, opts)?;
    // The opposite wing, stored axis-swapped: (measured Q, injected QB).
    let mirrored: Vec<(f64, f64)> = vtc(&base, "QB", "Q", cfg.vdd, step, opts)?
        .into_iter()
        .map(|(inj, out)| (out, inj))
        .collect();
    Ok(ButterflyCurve { forward, mirrored, mode, kind: Some(kind), vdd: cfg.vdd })
}

/// Hold- or read-mode butterfly of one cell.
pub fn butterfly(
    kind: CellKind,
    mode: SnmMode,
    cfg: &ProtocolConfig,
    opts: &SolverOptions,
) -> Result<ButterflyCurve, AnalysisError> {
    butterfly_with_attack(kind, mode, None, cfg, opts, SWEEP_STEP)
}

/// Butterfly at a caller-chosen sweep resolution (grid-convergence checks).
pub fn butterfly_with_step(
    kind: CellKind,
    mode: SnmMode,
    cfg: &ProtocolConfig,
    opts: &SolverOptions,
    step: f64,
) -> Result<ButterflyCurve, AnalysisError> {
    butterfly_with_attack(kind, mode, None, cfg, opts, step)
}

/// Static write margin: write-configured butterfly for both data attacks;
/// the margin is the worse of the two. A failed write (curves still
/// bistable) reports zero margin with `monostable = Some(false)`.
pub fn write_margin(
    kind: CellKind,
    cfg: &ProtocolConfig,
    opts: &SolverOptions,
) -> Result<SnmReport, AnalysisError> {
    let mut worst: Option<SnmReport> = None;
    for bit in [false, true] {
        let curve = butterfly_with_attack(kind, SnmMode::Write, Some(bit), cfg, opts, SWEEP_STEP)?;
        let rep = snm_max_square(&curve);
        let replace = match &worst {
            None => true,
            Some(w) => rep.snm < w.snm,
        };
        if replace {
            worst = Some(rep);
        }
    }
    Ok(worst.unwrap())
}

/// Write-configured butterfly for one attack value, for inspection/export.
pub fn write_butterfly(
    kind: CellKind,
    attack: bool,
    cfg: &ProtocolConfig,
    opts: &SolverOptions,
) -> Result<ButterflyCurve, AnalysisError> {
    butterfly_with_attack(kind, SnmMode::Write, Some(attack), cfg, opts, SWEEP_STEP)
}

/// Bit-line-sweep write-trip margin.
#[derive(Debug, Clone)]
pub struct WriteTripReport {
    /// Worst-case margin over the two data attacks (V): the bit-line swing
    /// left unused when the cell flips. Zero when a full swing cannot write.
    pub margin: f64,
    /// Bit-line voltage at which the cell flipped, per attack (write 0, 1).
    pub trips: [Option<f64>; 2],
    pub kind: CellKind,
}

/// The data line swept for each attack, with (start, target) levels. The
/// swept line starts at its retaining (precharge) level with every other
/// data line held at its own precharge; for the differential cells a
/// write of '1' is therefore the complement-line sweep, mirroring the
/// write-'0' case onto the other storage node.
fn trip_line(kind: CellKind, bit: bool, cfg: &ProtocolConfig) -> (&'static str, f64, f64) {
    let v = cfg.vdd;
    let attack = if bit { v } else { 0.0 };
    match kind {
        // The 4T writes through BLB with the complement of the data.
        CellKind::Sram4T => ("BLB", attack, v - attack),
        CellKind::Sram5T => ("BL", v - attack, attack),
        CellKind::Sram6T if bit => ("BLB", v, 0.0),
        CellKind::Sram6T => ("BL", v, 0.0),
        CellKind::Sram7T => ("WriteBit", v - attack, attack),
        CellKind::Sram8T if bit => ("WBLB", v, 0.0),
        CellKind::Sram8T => ("WBL", v, 0.0),
        CellKind::Sram9T => ("WBL", v - attack, attack),
        CellKind::Sram10T if bit => ("BLB", v, 0.0),
        CellKind::Sram10T => ("BL", v, 0.0),
    }
}

/// Write-trip-point extraction: with the cell holding the attacked state and
/// the write word lines asserted, the attacked data line sweeps from its
/// retaining level toward the attacking rail. The trip is the line voltage
/// at which the stored node crosses vdd/2; the margin is the remaining
/// swing `|v_trip - attack_rail|`.
pub fn write_trip_margin(
    kind: CellKind,
    cfg: &ProtocolConfig,
    opts: &SolverOptions,
) -> Result<WriteTripReport, AnalysisError> {
    cfg.validate()?;
    let params = Arc::new(CntfetParams::default());
    let mut trips: [Option<f64>; 2] = [None, None];
    let mut margins = [0.0f64; 2];
    for (slot, bit) in [(0usize, false), (1usize, true)] {
        let mut levels = bias_for(kind, SnmMode::Write, Some(bit), cfg);
        let (line, start, attack) = trip_line(kind, bit, cfg);
        // On the differential cells only the swept line moves; its partner
        // holds the precharge level instead of the attack value.
        for (port, level) in levels.iter_mut() {
            let differential_data =
                matches!(port.as_str(), "BL" | "BLB" | "WBL" | "WBLB")
                    && kind != CellKind::Sram4T
                    && kind != CellKind::Sram5T;
            if differential_data && port != line {
                *level = cfg.vdd;
            }
        }
        let mut circuit = biased_cell(kind, &levels, &params)?;
        let q = circuit.port("Q").unwrap();
        let qb = circuit.port("QB").unwrap();
        let label = format!("V{line}");

        // Stage the starting point so Newton tracks the stored branch and
        // not the metastable one: solve the cell fully idle first, then
        // warm-step the word lines (and any collapsed supply) to the write
        // bias with the swept line still at its retaining level.
        let stored = !bit;
        let idle: Vec<(String, f64)> = idle_levels(kind, cfg)
            .into_iter()
            .map(|(p, l)| (p.to_string(), l))
            .collect();
        for (port, level) in &idle {
            circuit.set_source_value(&format!("V{port}"), Waveform::Dc(*level));
        }
        circuit.set_source_value(&label, Waveform::Dc(start));
        let mut guess = vec![0.0; circuit.node_count];
        for (port, level) in &idle {
            if let Some(n) = circuit.node_by_name(port) {
                guess[n.0] = *level;
            }
        }
        guess[q.0] = if stored { cfg.vdd } else { 0.0 };
        guess[qb.0] = if stored { 0.0 } else { cfg.vdd };
        if let Some(n) = circuit.node_by_name("Q1") {
            guess[n.0] = guess[q.0];
        }
        let hold_sol = crate::solver::dc_operating_point(&circuit, opts, Some(&guess))?;
        for (port, level) in &levels {
            if port != line {
                circuit.set_source_value(&format!("V{port}"), Waveform::Dc(*level));
            }
        }
        circuit.set_source_value(&label, Waveform::Dc(start));
        let mut sol = crate::solver::dc_warm(&circuit, opts, &hold_sol.raw)?;
        // A start already past the trip (asserting the word lines alone
        // upset the cell) counts as a zero-swing flip: full margin.
        let started_flipped = if !bit {
            sol.voltage(q) <= 0.5 * cfg.vdd
        } else {
            sol.voltage(q) >= 0.5 * cfg.vdd
        };
        if started_flipped {
            trips[slot] = Some(start);
            margins[slot] = (start - attack).abs();
            continue;
        }

        let step = 2e-3 * if attack >= start { 1.0 } else { -1.0 };
        let n_steps = ((attack - start) / step).round() as usize;
        let mut prev_v = start;
        let mut prev_q = sol.voltage(q);
        let target_low = !bit;
        for k in 1..=n_steps {
            let v = start + step * k as f64;
            circuit.set_source_value(&label, Waveform::Dc(v));
            sol = crate::solver::dc_warm(&circuit, opts, &sol.raw)?;
            let q_now = sol.voltage(q);
            let crossed = if target_low {
                prev_q > 0.5 * cfg.vdd && q_now <= 0.5 * cfg.vdd
            } else {
                prev_q < 0.5 * cfg.vdd && q_now >= 0.5 * cfg.vdd
            };
            if crossed {
                let f = (0.5 * cfg.vdd - prev_q) / (q_now - prev_q);
                let v_trip = prev_v + f * (v - prev_v);
                trips[slot] = Some(v_trip);
                margins[slot] = (v_trip - attack).abs();
                break;
            }
            prev_v = v;
            prev_q = q_now;
        }
    }
    Ok(WriteTripReport { margin: margins[0].min(margins[1]), trips, kind })
}
