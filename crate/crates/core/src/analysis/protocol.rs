//! Timed stimulus sequences for the cell operations.
//!
//! A sequence drives the control and data ports of one cell through a
//! precharge / access / settle / idle timeline and marks those phases. Read
//! operations leave the sensed bit line undriven: the testbench precharges
//! it through a PMOS switch (gated by the `PRE` waveform emitted here) and
//! floats it for the access window.
//!
//! Cell-specific notes:
//!
//! * 4T writes drive only BLB with the complement of the data while BL and
//!   WL2 stay at their idle levels. A write of '1' completes through access
//!   leakage charging the storage node, so its access pulse is stretched to
//!   microseconds; a write of '0' flips through the driven NMOS access and
//!   uses the normal pulse.
//! * 4T reads assert WL2 low (PMOS access) and float BL from VDD.
//! * 5T uses the single bit line for both data values and precharges it to
//!   the intermediate `v_pc` for reads.
//! * 7T writes cut the feedback first (WriteBar low), then pulse
//!   WriteSelect, then restore the feedback before the sequence idles.
//! * 10T writes assert WL and WWL together, boosted by the write-assist
//!   fraction; reads assert WL only and pull Vgnd to ground.

use crate::cells::CellKind;
use crate::waveform::Waveform;

use super::{AnalysisError, Operation, ProtocolConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Precharge,
    Access,
    Settle,
    Idle,
}

#[derive(Debug, Clone, Copy)]
pub struct Phase {
    pub kind: PhaseKind,
    pub t0: f64,
    pub t1: f64,
}

/// A bit line left undriven during the sequence, precharged to `level`
/// through a testbench switch.
#[derive(Debug, Clone)]
pub struct FloatingLine {
    pub port: String,
    pub level: f64,
}

/// How the read verdict interprets the sensed line(s).
#[derive(Debug, Clone)]
pub enum ReadExpectation {
    /// `high` minus `low` must develop at least the sense margin.
    Differential { high: String, low: String },
    /// The line must move away from `reference` in the given direction.
    SingleEnded { line: String, reference: f64, rises: bool },
    /// The line must hold near `reference`.
    Stay { line: String, reference: f64 },
}

#[derive(Debug, Clone)]
pub struct StimulusSequence {
    pub kind: CellKind,
    pub op: Operation,
    /// Driven ports (testbench `PRE` gate included when lines float).
    pub waves: Vec<(String, Waveform)>,
    pub floating: Vec<FloatingLine>,
    pub phases: Vec<Phase>,
    pub t_end: f64,
    /// Read-verdict sampling instant (end of the access plateau).
    pub sense_time: Option<f64>,
    pub read_expectation: Option<ReadExpectation>,
}

impl StimulusSequence {
    pub fn phase(&self, kind: PhaseKind) -> Option<&Phase> {
        self.phases.iter().find(|p| p.kind == kind)
    }
}

/// Idle level of every port of `kind`.
pub fn idle_levels(kind: CellKind, cfg: &ProtocolConfig) -> Vec<(&'static str, f64)> {
    let v = cfg.vdd;
    match kind {
        CellKind::Sram4T => vec![
            ("VDD", v),
            ("BL", v),
            ("BLB", 0.0),
            ("WL1", cfg.v_idle1),
            ("WL2", cfg.v_idle2),
        ],
        CellKind::Sram5T => vec![("VDD", v), ("BL", cfg.v_pc), ("WL", 0.0)],
        CellKind::Sram6T => vec![("VDD", v), ("BL", v), ("BLB", v), ("WL", 0.0)],
        CellKind::Sram7T => vec![
            ("VDD", v),
            ("WriteBit", 0.0),
            ("ReadBit", v),
            ("WriteSelect", 0.0),
            ("ReadSelect", 0.0),
            ("WriteBar", v),
        ],
        CellKind::Sram8T => vec![
            ("VDD", v),
            ("WBL", v),
            ("WBLB", v),
            ("WWL", 0.0),
            ("RBL", v),
            ("RWL", 0.0),
        ],
        CellKind::Sram9T => vec![("VDD", v), ("WBL", v), ("WWL", 0.0), ("RBL", v), ("RWL", 0.0)],
        CellKind::Sram10T => vec![
            ("VDD", v),
            ("BL", v),
            ("BLB", v),
            ("WL", 0.0),
            ("WWL", 0.0),
            ("Vgnd", v),
        ],
    }
}

struct Timeline {
    slew: f64,
    t_drive: f64,
    t_access_on: f64,
    t_access_off: f64,
    t_restore: f64,
    t_end: f64,
}

fn timeline(cfg: &ProtocolConfig, pulse: f64) -> Timeline {
    let sl = cfg.slew;
    let t_pre = 0.8e-9;
    let t_drive = t_pre;
    let t_access_on = t_drive + sl + 0.2e-9;
    let t_access_off = t_access_on + sl + pulse;
    let t_restore = t_access_off + sl + 0.5e-9;
    let t_end = t_restore + sl + 1.0e-9;
    Timeline { slew: sl, t_drive, t_access_on, t_access_off, t_restore, t_end }
}

/// A level that moves from `idle` to `active` at `t_on` and back at `t_off`.
fn pulse_wave(idle: f64, active: f64, t_on: f64, t_off: f64, slew: f64) -> Waveform {
    if (idle - active).abs() < 1e-15 {
        return Waveform::Dc(idle);
    }
    Waveform::Pwl(vec![
        (0.0, idle),
        (t_on, idle),
        (t_on + slew, active),
        (t_off, active),
        (t_off + slew, idle),
    ])
}

fn phases_of(t: &Timeline) -> Vec<Phase> {
    vec![
        Phase { kind: PhaseKind::Precharge, t0: 0.0, t1: t.t_access_on },
        Phase { kind: PhaseKind::Access, t0: t.t_access_on, t1: t.t_access_off },
        Phase { kind: PhaseKind::Settle, t0: t.t_access_off, t1: t.t_restore },
        Phase { kind: PhaseKind::Idle, t0: t.t_restore, t1: t.t_end },
    ]
}

/// Builds the full timed sequence for `(kind, op)`, ending in the cell's
/// idle configuration.
pub fn build_protocol(
    kind: CellKind,
    op: Operation,
    cfg: &ProtocolConfig,
) -> Result<StimulusSequence, AnalysisError> {
    cfg.validate()?;
    let v = cfg.vdd;
    let boost = 1.0 + cfg.write_boost_for(kind);
    let idle: Vec<(&str, f64)> = idle_levels(kind, cfg);
    let level_of = |port: &str| -> f64 {
        idle.iter().find(|(p, _)| *p == port).map(|(_, l)| *l).unwrap_or(0.0)
    };

    match op {
        Operation::Hold => {
            let t_end = cfg.hold_duration;
            let waves = idle
                .iter()
                .map(|(p, l)| (p.to_string(), Waveform::Dc(*l)))
                .collect();
            Ok(StimulusSequence {
                kind,
                op,
                waves,
                floating: Vec::new(),
                phases: vec![Phase { kind: PhaseKind::Idle, t0: 0.0, t1: t_end }],
                t_end,
                sense_time: None,
                read_expectation: None,
            })
        }
        Operation::Write0 | Operation::Write1 => {
            let bit = op.bit().unwrap();
            let data = if bit { v } else { 0.0 };
            // Leakage-driven completion needs microseconds, not nanoseconds:
            // the access parks STB low, then the PMOS access leakage walks
            // the floating ST up until the latch lets go.
            let pulse = if kind == CellKind::Sram4T && bit {
                5.0e-6
            } else {
                cfg.pulse_width
            };
            let t = timeline(cfg, pulse);
            let mut waves: Vec<(String, Waveform)> = Vec::new();
            let drive =
                |port: &str, active: f64, waves: &mut Vec<(String, Waveform)>| {
                    waves.push((
                        port.to_string(),
                        pulse_wave(level_of(port), active, t.t_drive, t.t_restore, t.slew),
                    ));
                };
            let word =
                |port: &str, active: f64, waves: &mut Vec<(String, Waveform)>| {
                    waves.push((
                        port.to_string(),
                        pulse_wave(level_of(port), active, t.t_access_on, t.t_access_off, t.slew),
                    ));
                };
            match kind {
                CellKind::Sram4T => {
                    // Complement of the data on BLB; BL and WL2 stay idle.
                    drive("BLB", if bit { 0.0 } else { v }, &mut waves);
                    word("WL1", v * boost, &mut waves);
                    waves.push(("BL".into(), Waveform::Dc(v)));
                    waves.push(("WL2".into(), Waveform::Dc(cfg.v_idle2)));
                }
                CellKind::Sram5T => {
                    drive("BL", data, &mut waves);
                    word("WL", v * boost, &mut waves);
                }
                CellKind::Sram6T => {
                    drive("BL", data, &mut waves);
                    drive("BLB", v - data, &mut waves);
                    word("WL", v * boost, &mut waves);
                }
                CellKind::Sram7T => {
                    drive("WriteBit", data, &mut waves);
                    word("WriteSelect", v * boost, &mut waves);
                    // Feedback cut from just before the data drive until the
                    // settle phase, then reconnected to latch the new state.
                    waves.push((
                        "WriteBar".into(),
                        Waveform::Pwl(vec![
                            (0.0, v),
                            (t.t_drive - 0.2e-9, v),
                            (t.t_drive - 0.2e-9 + t.slew, 0.0),
                            (t.t_access_off + t.slew, 0.0),
                            (t.t_access_off + t.slew * 2.0, v),
                        ]),
                    ));
                    waves.push(("ReadSelect".into(), Waveform::Dc(0.0)));
                    waves.push(("ReadBit".into(), Waveform::Dc(v)));
                }
                CellKind::Sram8T => {
                    drive("WBL", data, &mut waves);
                    drive("WBLB", v - data, &mut waves);
                    word("WWL", v * boost, &mut waves);
                    waves.push(("RBL".into(), Waveform::Dc(v)));
                    waves.push(("RWL".into(), Waveform::Dc(0.0)));
                }
                CellKind::Sram9T => {
                    drive("WBL", data, &mut waves);
                    word("WWL", v * boost, &mut waves);
                    waves.push(("RBL".into(), Waveform::Dc(v)));
                    waves.push(("RWL".into(), Waveform::Dc(0.0)));
                }
                CellKind::Sram10T => {
                    drive("BL", data, &mut waves);
                    drive("BLB", v - data, &mut waves);
                    word("WL", v * boost, &mut waves);
                    word("WWL", v * boost, &mut waves);
                    waves.push(("Vgnd".into(), Waveform::Dc(v)));
                    // The supply floats for the write access: modelled as a
                    // dip that weakens the latch while the boosted word
                    // lines drive the series access stacks.
                    let dip = cfg.collapsed_vdd(cfg.write_assist_boost);
                    word("VDD", dip, &mut waves);
                }
            }
            if !waves.iter().any(|(p, _)| p == "VDD") {
                waves.push(("VDD".into(), Waveform::Dc(v)));
            }
            Ok(StimulusSequence {
                kind,
                op,
                waves,
                floating: Vec::new(),
                phases: phases_of(&t),
                t_end: t.t_end,
                sense_time: None,
                read_expectation: None,
            })
        }
        Operation::Read0 | Operation::Read1 => {
            let bit = op.bit().unwrap();
            let t = timeline(cfg, cfg.pulse_width);
            let mut waves: Vec<(String, Waveform)> = Vec::new();
            let mut floating: Vec<FloatingLine> = Vec::new();
            let word =
                |port: &str, active: f64, waves: &mut Vec<(String, Waveform)>| {
                    waves.push((
                        port.to_string(),
                        pulse_wave(level_of(port), active, t.t_access_on, t.t_access_off, t.slew),
                    ));
                };
            // Precharge switch gate: on (low) before the access, off during
            // it, on again for the idle tail.
            waves.push((
                "PRE".into(),
                Waveform::Pwl(vec![
                    (0.0, 0.0),
                    (t.t_drive, 0.0),
                    (t.t_drive + t.slew, v),
                    (t.t_restore, v),
                    (t.t_restore + t.slew, 0.0),
                ]),
            ));

            let expectation = match kind {
                CellKind::Sram4T => {
                    floating.push(FloatingLine { port: "BL".into(), level: v });
                    word("WL2", 0.0, &mut waves);
                    waves.push(("BLB".into(), Waveform::Dc(0.0)));
                    waves.push(("WL1".into(), Waveform::Dc(cfg.v_idle1)));
                    if bit {
                        ReadExpectation::Stay { line: "BL".into(), reference: v }
                    } else {
                        ReadExpectation::SingleEnded { line: "BL".into(), reference: v, rises: false }
                    }
                }
                CellKind::Sram5T => {
                    floating.push(FloatingLine { port: "BL".into(), level: cfg.v_pc });
                    word("WL", v, &mut waves);
                    ReadExpectation::SingleEnded {
                        line: "BL".into(),
                        reference: cfg.v_pc,
                        rises: bit,
                    }
                }
                CellKind::Sram6T => {
                    floating.push(FloatingLine { port: "BL".into(), level: v });
                    floating.push(FloatingLine { port: "BLB".into(), level: v });
                    word("WL", v, &mut waves);
                    if bit {
                        ReadExpectation::Differential { high: "BL".into(), low: "BLB".into() }
                    } else {
                        ReadExpectation::Differential { high: "BLB".into(), low: "BL".into() }
                    }
                }
                CellKind::Sram7T => {
                    floating.push(FloatingLine { port: "ReadBit".into(), level: v });
                    word("ReadSelect", v, &mut waves);
                    waves.push(("WriteSelect".into(), Waveform::Dc(0.0)));
                    waves.push(("WriteBar".into(), Waveform::Dc(v)));
                    waves.push(("WriteBit".into(), Waveform::Dc(0.0)));
                    if bit {
                        ReadExpectation::Stay { line: "ReadBit".into(), reference: v }
                    } else {
                        ReadExpectation::SingleEnded {
                            line: "ReadBit".into(),
                            reference: v,
                            rises: false,
                        }
                    }
                }
                CellKind::Sram8T => {
                    floating.push(FloatingLine { port: "RBL".into(), level: v });
                    word("RWL", v, &mut waves);
                    waves.push(("WBL".into(), Waveform::Dc(v)));
                    waves.push(("WBLB".into(), Waveform::Dc(v)));
                    waves.push(("WWL".into(), Waveform::Dc(0.0)));
                    if bit {
                        // RBL discharges through the stack when q holds '1'.
                        ReadExpectation::SingleEnded { line: "RBL".into(), reference: v, rises: false }
                    } else {
                        ReadExpectation::Stay { line: "RBL".into(), reference: v }
                    }
                }
                CellKind::Sram9T => {
                    floating.push(FloatingLine { port: "RBL".into(), level: v });
                    word("RWL", v, &mut waves);
                    waves.push(("WBL".into(), Waveform::Dc(v)));
                    waves.push(("WWL".into(), Waveform::Dc(0.0)));
                    if bit {
                        ReadExpectation::Stay { line: "RBL".into(), reference: v }
                    } else {
                        // Qb high conditionally discharges RBL.
                        ReadExpectation::SingleEnded { line: "RBL".into(), reference: v, rises: false }
                    }
                }
                CellKind::Sram10T => {
                    floating.push(FloatingLine { port: "BL".into(), level: v });
                    floating.push(FloatingLine { port: "BLB".into(), level: v });
                    word("WL", v, &mut waves);
                    word("Vgnd", 0.0, &mut waves);
                    waves.push(("WWL".into(), Waveform::Dc(0.0)));
                    // The read develops inverted: the bit line on the side
                    // storing '1' is the one that discharges.
                    if bit {
                        ReadExpectation::Differential { high: "BLB".into(), low: "BL".into() }
                    } else {
                        ReadExpectation::Differential { high: "BL".into(), low: "BLB".into() }
                    }
                }
            };
            waves.push(("VDD".into(), Waveform::Dc(v)));
            Ok(StimulusSequence {
                kind,
                op,
                waves,
                floating,
                phases: phases_of(&t),
                t_end: t.t_end,
                sense_time: Some(t.t_access_off),
                read_expectation: Some(expectation),
            })
        }
    }
}
