//! Operating-voltage calibration sweeps for the levels the cell protocols
//! need but that have no closed-form value: the 4T idle word-line biases
//! and the 5T intermediate precharge voltage.
//!
//! Each sweep walks a candidate grid, runs the acceptance testbenches at
//! every point, finds the longest contiguous passing window and returns its
//! midpoint. The shipped default configuration was produced by these sweeps.

use crate::cells::CellKind;
use crate::solver::SolverOptions;

use super::testbench::run_testbench;
use super::{AnalysisError, Operation, ProtocolConfig};

#[derive(Debug, Clone)]
pub struct CalibrationOutcome {
    pub parameter: &'static str,
    /// (value, all tests passed) per grid point.
    pub points: Vec<(f64, bool)>,
    /// Longest contiguous passing interval.
    pub window: Option<(f64, f64)>,
    pub midpoint: Option<f64>,
}

fn longest_window(points: &[(f64, bool)]) -> Option<(f64, f64)> {
    let mut best: Option<(usize, usize)> = None;
    let mut run_start: Option<usize> = None;
    for (i, (_, ok)) in points.iter().enumerate() {
        match (*ok, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                let len = i - s;
                if best.map(|(a, b)| b - a < len).unwrap_or(true) {
                    best = Some((s, i));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        let len = points.len() - s;
        if best.map(|(a, b)| b - a < len).unwrap_or(true) {
            best = Some((s, points.len()));
        }
    }
    best.map(|(s, e)| (points[s].0, points[e - 1].0))
}

fn sweep<F>(
    parameter: &'static str,
    grid: &[f64],
    mut passes: F,
) -> Result<CalibrationOutcome, AnalysisError>
where
    F: FnMut(f64) -> Result<bool, AnalysisError>,
{
    let mut points = Vec::with_capacity(grid.len());
    for &v in grid {
        // A non-converging point is simply a failing point.
        let ok = passes(v).unwrap_or(false);
        points.push((v, ok));
    }
    let window = longest_window(&points);
    let midpoint = window.map(|(a, b)| 0.5 * (a + b));
    Ok(CalibrationOutcome { parameter, points, window, midpoint })
}

fn grid(vdd: f64) -> Vec<f64> {
    (0..=18).map(|i| i as f64 * vdd / 18.0).collect()
}

/// Criterion for the 4T idle biases. Retention of both states over the
/// hold window anchors the sweep; reads and writes are held to pass as
/// well, since the NMOS-access idle leak that sustains a stored '0' also
/// drains the floating STB node during a read disturb if it is too strong.
fn cell_4t_ok(cfg: &ProtocolConfig, opts: &SolverOptions) -> Result<bool, AnalysisError> {
    for op in [
        Operation::Hold,
        Operation::Read0,
        Operation::Read1,
        Operation::Write0,
        Operation::Write1,
    ] {
        match run_testbench(CellKind::Sram4T, op, cfg, opts) {
            Ok(r) if r.verdict.passed() => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Sweeps `v_idle2` (PMOS-access word line), then `v_idle1` (NMOS-access
/// word line) with the found midpoint in place. Returns both sweeps and the
/// calibrated configuration.
pub fn calibrate_4t(
    base: &ProtocolConfig,
    opts: &SolverOptions,
) -> Result<(CalibrationOutcome, CalibrationOutcome, ProtocolConfig), AnalysisError> {
    let mut cfg = base.clone();
    let g = grid(cfg.vdd);
    let idle2 = sweep("v_idle2", &g, |v| {
        let mut c = cfg.clone();
        c.v_idle2 = v;
        cell_4t_ok(&c, opts)
    })?;
    if let Some(m) = idle2.midpoint {
        cfg.v_idle2 = m;
    }
    let idle1 = sweep("v_idle1", &g, |v| {
        let mut c = cfg.clone();
        c.v_idle1 = v;
        cell_4t_ok(&c, opts)
    })?;
    if let Some(m) = idle1.midpoint {
        cfg.v_idle1 = m;
    }
    Ok((idle2, idle1, cfg))
}

/// Sweeps the 5T precharge voltage: reads of both values must be correct
/// and non-destructive and writes of both values must succeed.
pub fn calibrate_5t(
    base: &ProtocolConfig,
    opts: &SolverOptions,
) -> Result<(CalibrationOutcome, ProtocolConfig), AnalysisError> {
    let mut cfg = base.clone();
    let g = grid(cfg.vdd);
    let pc = sweep("v_pc", &g, |v| {
        let mut c = cfg.clone();
        c.v_pc = v;
        for op in [Operation::Read0, Operation::Read1, Operation::Write0, Operation::Write1] {
            if !run_testbench(CellKind::Sram5T, op, &c, opts)?.verdict.passed() {
                return Ok(false);
            }
        }
        Ok(true)
    })?;
    if let Some(m) = pc.midpoint {
        cfg.v_pc = m;
    }
    Ok((pc, cfg))
}
