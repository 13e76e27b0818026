//! Cell-level analyses: timed read/write/hold protocols, functional
//! testbenches, butterfly curves with static-noise-margin extraction,
//! write margins, and per-source energy accounting.

pub mod butterfly;
pub mod calibrate;
pub mod energy;
pub mod protocol;
pub mod snm;
pub mod testbench;

pub use butterfly::{butterfly, butterfly_with_step, write_margin, write_trip_margin, WriteTripReport};
pub use energy::{measure_energy, EnergyReport};
pub use protocol::{build_protocol, Phase, PhaseKind, StimulusSequence};
pub use snm::{comparison_table, snm_max_square, ButterflyCurve, SnmMode, SnmReport};
pub use testbench::{run_testbench, run_testbench_with, TestbenchResult, Verdict};

use thiserror::Error;

use crate::cells::{CellError, CellKind};
use crate::solver::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    Write0,
    Write1,
    Read0,
    Read1,
    Hold,
}

impl Operation {
    pub const ALL: [Operation; 5] = [
        Operation::Write0,
        Operation::Write1,
        Operation::Read0,
        Operation::Read1,
        Operation::Hold,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operation::Write0 => "write0",
            Operation::Write1 => "write1",
            Operation::Read0 => "read0",
            Operation::Read1 => "read1",
            Operation::Hold => "hold",
        }
    }

    pub fn from_name(s: &str) -> Option<Operation> {
        match s.to_ascii_lowercase().as_str() {
            "write0" => Some(Operation::Write0),
            "write1" => Some(Operation::Write1),
            "read0" => Some(Operation::Read0),
            "read1" => Some(Operation::Read1),
            "hold" => Some(Operation::Hold),
            _ => None,
        }
    }

    /// Data bit carried by the operation, if any.
    pub fn bit(self) -> Option<bool> {
        match self {
            Operation::Write0 | Operation::Read0 => Some(false),
            Operation::Write1 | Operation::Read1 => Some(true),
            Operation::Hold => None,
        }
    }
}

/// Voltages and timing of the cell protocols.
#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    /// Supply (V).
    pub vdd: f64,
    /// 4T NMOS-access word-line idle level (V); calibrated, see `calibrate`.
    pub v_idle1: f64,
    /// 4T PMOS-access word-line idle level (V); calibrated.
    pub v_idle2: f64,
    /// 5T intermediate bit-line precharge (V); calibrated.
    pub v_pc: f64,
    /// Write-assist word-line boost as a fraction of vdd.
    pub write_assist_boost: f64,
    /// Applies the boost to write word lines of any cell when true. The 10T
    /// write protocol boosts regardless: that cell is designed around it.
    pub assist: bool,
    /// Word-line pulse width (s).
    pub pulse_width: f64,
    /// Edge slew time (s).
    pub slew: f64,
    /// Hold-test window (s).
    pub hold_duration: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            vdd: 0.9,
            v_idle1: 0.175,
            v_idle2: 0.60,
            v_pc: 0.45,
            write_assist_boost: 0.30,
            assist: false,
            pulse_width: 2e-9,
            slew: 50e-12,
            hold_duration: 1e-6,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let ceiling = self.vdd * (1.0 + self.write_assist_boost);
        for (v, name) in [
            (self.v_idle1, "v_idle1"),
            (self.v_idle2, "v_idle2"),
            (self.v_pc, "v_pc"),
        ] {
            if !(0.0 <= v && v <= ceiling) {
                return Err(AnalysisError::BadConfig(format!("{name} out of range")));
            }
        }
        if !(self.write_assist_boost >= 0.0) {
            return Err(AnalysisError::BadConfig("write_assist_boost must be >= 0".into()));
        }
        if !(self.vdd > 0.0 && self.pulse_width > 0.0 && self.slew > 0.0 && self.hold_duration > 0.0)
        {
            return Err(AnalysisError::BadConfig("times and vdd must be positive".into()));
        }
        Ok(())
    }

    /// Boost factor applied to write word lines for `kind`.
    pub fn write_boost_for(&self, kind: CellKind) -> f64 {
        if self.assist || kind == CellKind::Sram10T {
            self.write_assist_boost
        } else {
            0.0
        }
    }

    /// Cell supply during an assisted write. The floating rail is modelled
    /// as a collapse proportional to the assist boost: the write current
    /// actively discharges a floating supply until the latch releases, so
    /// the rail bottoms out near the threshold voltage (25% of vdd at the
    /// stock 30% boost), taking the latch out of the fight entirely.
    pub fn collapsed_vdd(&self, boost: f64) -> f64 {
        (self.vdd * (1.0 - 2.5 * boost)).max(0.1 * self.vdd)
    }
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error(transparent)]
    Netlist(#[from] crate::netlist::NetlistError),
    #[error("operation {op:?} is not defined for {kind:?}")]
    UnsupportedOp { kind: CellKind, op: Operation },
    #[error("energy window is empty")]
    EmptyWindow,
    #[error("bad configuration: {0}")]
    BadConfig(String),
}
