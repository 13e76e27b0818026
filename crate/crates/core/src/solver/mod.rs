//! Circuit solver: nonlinear DC operating points via damped Newton with
//! gmin/source-stepping fallbacks, warm-started DC sweeps, and fixed-step
//! implicit transient integration (backward Euler or trapezoidal).

pub mod lu;
pub mod stamp;
mod transient;

pub use transient::{transient, TransientTrace};

use thiserror::Error;

use crate::netlist::{Circuit, ElementValue};
use crate::waveform::Waveform;
use stamp::{Assembler, Companion};

/// Newton per-iteration voltage step limit (V). The exponential subthreshold
/// model overflows under full steps from a poor guess.
pub const NEWTON_DAMP_V: f64 = 0.3;

/// Shunt conductance left in place on the last gmin rung (S).
pub const GMIN_FINAL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegratorKind {
    BackwardEuler,
    Trapezoidal,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Newton step tolerance per node (V).
    pub v_abstol: f64,
    /// KCL residual tolerance per node (A).
    pub i_abstol: f64,
    pub max_newton_iters: usize,
    /// First gmin-stepping shunt (S).
    pub gmin_start: f64,
    pub gmin_steps: usize,
    pub source_steps: usize,
    /// Transient step (s).
    pub dt: f64,
    pub integrator: IntegratorKind,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            v_abstol: 1e-9,
            i_abstol: 1e-12,
            max_newton_iters: 200,
            gmin_start: 1e-3,
            gmin_steps: 10,
            source_steps: 10,
            dt: 1e-12,
            integrator: IntegratorKind::Trapezoidal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergedVia {
    Direct,
    GminStepping,
    SourceStepping,
}

/// A solved operating point.
#[derive(Debug, Clone)]
pub struct DcSolution {
    /// Node voltages indexed by node id; entry 0 (ground) is 0.
    pub node_voltages: Vec<f64>,
    /// Current delivered out of the positive terminal, per source label.
    pub source_currents: Vec<(String, f64)>,
    pub converged_via: ConvergedVia,
    /// Raw unknown vector (free node voltages then branch currents); valid
    /// only against the circuit that produced it.
    pub raw: Vec<f64>,
}

impl DcSolution {
    pub fn voltage(&self, node: crate::netlist::NodeId) -> f64 {
        self.node_voltages[node.0]
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("newton failed to converge{}: residual {residual:.3e} A", at.map(|t| format!(" at t = {t:.4e} s")).unwrap_or_default())]
    NonConvergence { residual: f64, at: Option<f64> },
    #[error("singular MNA matrix at row {row}{}", at.map(|t| format!(" (t = {t:.4e} s)")).unwrap_or_default())]
    SingularMatrix { row: usize, at: Option<f64> },
    #[error("no voltage source labelled `{0}`")]
    UnknownSource(String),
    #[error("initial state has wrong dimension (want {want}, got {got})")]
    DimensionMismatch { want: usize, got: usize },
    #[error("sweep step must be positive")]
    BadSweepStep,
}

pub(crate) struct NewtonOutcome {
    pub residual: f64,
}

/// Damped Newton iteration on the assembled system. On success `x` holds the
/// solution.
pub(crate) fn newton(
    asm: &mut Assembler,
    x: &mut [f64],
    source_vals: &[f64],
    companion: Option<&Companion>,
    gshunt: f64,
    opts: &SolverOptions,
) -> Result<NewtonOutcome, SolverError> {
    let n_free = asm.layout.n_free;
    let n = asm.layout.n_unknowns();
    let mut last_step = f64::INFINITY;
    let mut best_residual = f64::INFINITY;
    for _iter in 0..opts.max_newton_iters {
        asm.assemble(x, source_vals, companion, gshunt);
        let mut f_node: f64 = 0.0;
        let mut f_src: f64 = 0.0;
        for (i, r) in asm.res.iter().enumerate() {
            if i < n_free {
                f_node = f_node.max(r.abs());
            } else {
                f_src = f_src.max(r.abs());
            }
        }
        best_residual = best_residual.min(f_node);
        if f_node <= opts.i_abstol && f_src <= opts.v_abstol && last_step <= opts.v_abstol {
            return Ok(NewtonOutcome { residual: f_node });
        }
        let rhs: Vec<f64> = asm.res.iter().map(|v| -v).collect();
        let mut jac = asm.jac.clone();
        let dx = jac
            .solve(rhs)
            .map_err(|e| SolverError::SingularMatrix { row: e.row, at: None })?;
        let mut max_node_step: f64 = 0.0;
        for i in 0..n_free {
            max_node_step = max_node_step.max(dx[i].abs());
        }
        let alpha = if max_node_step > NEWTON_DAMP_V {
            NEWTON_DAMP_V / max_node_step
        } else {
            1.0
        };
        for i in 0..n {
            x[i] += alpha * dx[i];
        }
        last_step = alpha * max_node_step;
    }
    Err(SolverError::NonConvergence { residual: best_residual, at: None })
}

/// Per-slot DC source values, optionally scaled (source stepping).
fn dc_source_values(circuit: &Circuit, asm: &Assembler, scale: f64) -> Vec<f64> {
    asm.layout
        .source_elem
        .iter()
        .map(|&ei| match &circuit.elements[ei].value {
            ElementValue::Source(w) => w.dc_value() * scale,
            _ => unreachable!(),
        })
        .collect()
}

pub(crate) fn solution_from(
    circuit: &Circuit,
    asm: &Assembler,
    x: &[f64],
    via: ConvergedVia,
) -> DcSolution {
    let mut node_voltages = vec![0.0; circuit.node_count];
    for i in 0..asm.layout.n_free {
        node_voltages[i + 1] = x[i];
    }
    let source_currents = asm
        .layout
        .source_elem
        .iter()
        .enumerate()
        .map(|(slot, &ei)| {
            let label = circuit.elements[ei].label.clone();
            (label, -x[asm.layout.source_row(slot)])
        })
        .collect();
    DcSolution { node_voltages, source_currents, converged_via: via, raw: x.to_vec() }
}

/// Seeds the unknown vector from an optional node-voltage guess. The guess
/// may cover all nodes (ground included) or just the free nodes.
fn seed(asm: &Assembler, guess: Option<&[f64]>) -> Vec<f64> {
    let mut x = vec![0.0; asm.layout.n_unknowns()];
    if let Some(g) = guess {
        let n_free = asm.layout.n_free;
        if g.len() == n_free + 1 {
            x[..n_free].copy_from_slice(&g[1..]);
        } else {
            let m = g.len().min(n_free);
            x[..m].copy_from_slice(&g[..m]);
        }
    }
    x
}

/// Finds the DC operating point, retrying with gmin stepping and then
/// source stepping when direct Newton fails. `initial_guess` (node voltages)
/// selects the branch of a bistable circuit.
pub fn dc_operating_point(
    circuit: &Circuit,
    opts: &SolverOptions,
    initial_guess: Option<&[f64]>,
) -> Result<DcSolution, SolverError> {
    let mut asm = Assembler::new(circuit);
    let source_vals = dc_source_values(circuit, &asm, 1.0);

    // Direct attempt.
    let mut x = seed(&asm, initial_guess);
    if newton(&mut asm, &mut x, &source_vals, None, 0.0, opts).is_ok() {
        return Ok(solution_from(circuit, &asm, &x, ConvergedVia::Direct));
    }

    // Gmin stepping: shunt every node to ground, relax the shunt toward
    // GMIN_FINAL, then try to remove it entirely.
    let mut x = seed(&asm, initial_guess);
    let steps = opts.gmin_steps.max(1);
    let ratio = if steps > 1 {
        (GMIN_FINAL / opts.gmin_start).powf(1.0 / (steps as f64 - 1.0))
    } else {
        1.0
    };
    let mut g = opts.gmin_start;
    let mut last_rung_ok = false;
    for _ in 0..steps {
        last_rung_ok = newton(&mut asm, &mut x, &source_vals, None, g, opts).is_ok();
        g *= ratio;
    }
    if last_rung_ok {
        let mut polished = x.clone();
        if newton(&mut asm, &mut polished, &source_vals, None, 0.0, opts).is_ok() {
            return Ok(solution_from(circuit, &asm, &polished, ConvergedVia::GminStepping));
        }
        // The shunt-free system may be singular (truly floating node); the
        // GMIN_FINAL solution stands if the element-only KCL still closes.
        if asm.kcl_residual(&x, &source_vals, None) <= opts.i_abstol {
            return Ok(solution_from(circuit, &asm, &x, ConvergedVia::GminStepping));
        }
    }

    // Source stepping: ramp every source from zero.
    let mut x = seed(&asm, None);
    let n_steps = opts.source_steps.max(1);
    let mut best = f64::INFINITY;
    let mut ok = true;
    for k in 1..=n_steps {
        let scale = k as f64 / n_steps as f64;
        let vals = dc_source_values(circuit, &asm, scale);
        match newton(&mut asm, &mut x, &vals, None, 0.0, opts) {
            Ok(out) => best = best.min(out.residual),
            Err(SolverError::NonConvergence { residual, .. }) => {
                best = best.min(residual);
                ok = false;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if ok {
        return Ok(solution_from(circuit, &asm, &x, ConvergedVia::SourceStepping));
    }
    Err(SolverError::NonConvergence { residual: best, at: None })
}

/// Warm-started continuation solve used by sweeps and endpoint checks:
/// Newton from a full previous unknown vector, with a gmin retry.
pub(crate) fn dc_warm(
    circuit: &Circuit,
    opts: &SolverOptions,
    warm: &[f64],
) -> Result<DcSolution, SolverError> {
    let mut asm = Assembler::new(circuit);
    if warm.len() != asm.layout.n_unknowns() {
        return Err(SolverError::DimensionMismatch {
            want: asm.layout.n_unknowns(),
            got: warm.len(),
        });
    }
    let source_vals = dc_source_values(circuit, &asm, 1.0);
    let mut x = warm.to_vec();
    if newton(&mut asm, &mut x, &source_vals, None, 0.0, opts).is_ok() {
        return Ok(solution_from(circuit, &asm, &x, ConvergedVia::Direct));
    }
    dc_operating_point(circuit, opts, Some(&warm[..asm.layout.n_free]))
}

/// Sweeps the DC value of `source_label` from `from` to `to` (inclusive,
/// either direction), warm-starting each point from the previous solution.
pub fn dc_sweep(
    circuit: &Circuit,
    source_label: &str,
    from: f64,
    to: f64,
    step: f64,
    opts: &SolverOptions,
) -> Result<Vec<(f64, DcSolution)>, SolverError> {
    if !(step > 0.0) {
        return Err(SolverError::BadSweepStep);
    }
    if circuit
        .find_element(source_label)
        .map(|e| !matches!(e.value, ElementValue::Source(_)))
        .unwrap_or(true)
    {
        return Err(SolverError::UnknownSource(source_label.to_string()));
    }
    let dir = if to >= from { 1.0 } else { -1.0 };
    let n_pts = ((to - from).abs() / step).round() as usize;
    let mut grid = Vec::with_capacity(n_pts + 1);
    for k in 0..=n_pts {
        grid.push(from + dir * step * k as f64);
    }
    if (grid.last().copied().unwrap_or(from) - to).abs() > step * 1e-9 {
        grid.push(to);
    }

    let mut work = circuit.clone();
    let mut out = Vec::with_capacity(grid.len());
    let mut warm: Option<Vec<f64>> = None;
    for v in grid {
        work.set_source_value(source_label, Waveform::Dc(v));
        let sol = match &warm {
            Some(w) => dc_warm(&work, opts, w),
            None => dc_operating_point(&work, opts, None),
        }
        .map_err(|e| match e {
            SolverError::NonConvergence { residual, .. } => {
                SolverError::NonConvergence { residual, at: Some(v) }
            }
            other => other,
        })?;
        warm = Some(sol.raw.clone());
        out.push((v, sol));
    }
    Ok(out)
}

/// CSV export of a DC sweep: sweep value, then every named port, then the
/// delivered current of each source, full double precision.
pub fn sweep_to_csv(points: &[(f64, DcSolution)], circuit: &Circuit) -> String {
    let mut out = String::from("sweep");
    for (name, _) in &circuit.ports {
        out.push(',');
        out.push_str(name);
    }
    if let Some((_, first)) = points.first() {
        for (label, _) in &first.source_currents {
            out.push_str(",I(");
            out.push_str(label);
            out.push(')');
        }
    }
    out.push('\n');
    for (v, sol) in points {
        out.push_str(&format!("{v:.17e}"));
        for (_, node) in &circuit.ports {
            out.push_str(&format!(",{:.17e}", sol.node_voltages[node.0]));
        }
        for (_, i) in &sol.source_currents {
            out.push_str(&format!(",{i:.17e}"));
        }
        out.push('\n');
    }
    out
}

/// Element-equation KCL residual of a solution (A), for independent
/// verification of solver output.
pub fn kcl_residual(circuit: &Circuit, sol: &DcSolution) -> f64 {
    let mut asm = Assembler::new(circuit);
    let source_vals = dc_source_values(circuit, &asm, 1.0);
    asm.kcl_residual(&sol.raw, &source_vals, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::CircuitBuilder;
    use crate::waveform::Waveform;

    fn divider() -> Circuit {
        let mut b = CircuitBuilder::new();
        let vin = b.node("vin");
        let mid = b.node("mid");
        b.add_vsource("V1", vin, crate::netlist::NodeId::GROUND, Waveform::Dc(0.9));
        b.add_resistor("R1", vin, mid, 1e3);
        b.add_resistor("R2", mid, crate::netlist::NodeId::GROUND, 1e3);
        b.add_port("MID", mid);
        b.build().unwrap()
    }

    #[test]
    fn divider_exact() {
        let c = divider();
        let sol = dc_operating_point(&c, &SolverOptions::default(), None).unwrap();
        let mid = sol.voltage(c.port("MID").unwrap());
        assert!((mid - 0.45).abs() < 1e-6, "mid = {mid}");
        assert_eq!(sol.converged_via, ConvergedVia::Direct);
        // Source delivers 0.9 / 2k = 0.45 mA.
        assert!((sol.source_currents[0].1 - 0.45e-3).abs() < 1e-9);
    }

    #[test]
    fn sweep_identity_for_direct_source() {
        let mut b = CircuitBuilder::new();
        let a = b.node("a");
        b.add_vsource("VS", a, crate::netlist::NodeId::GROUND, Waveform::Dc(0.0));
        b.add_resistor("RL", a, crate::netlist::NodeId::GROUND, 1e3);
        let c = b.build().unwrap();
        let pts = dc_sweep(&c, "VS", 0.0, 0.5, 0.1, &SolverOptions::default()).unwrap();
        assert_eq!(pts.len(), 6);
        for (v, sol) in pts {
            assert!((sol.node_voltages[1] - v).abs() < 1e-9);
        }
    }

    #[test]
    fn unknown_sweep_source_rejected() {
        let c = divider();
        assert!(matches!(
            dc_sweep(&c, "VX", 0.0, 1.0, 0.1, &SolverOptions::default()),
            Err(SolverError::UnknownSource(_))
        ));
    }

    #[test]
    fn floating_cap_node_via_gmin() {
        // Node joined to the rest only through a capacitor: the shunt-free
        // system is singular, so gmin stepping must carry the answer, and it
        // must match an explicit 1e-12 S tie to ground.
        let build = |tie: bool| {
            let mut b = CircuitBuilder::new();
            let a = b.node("a");
            let fl = b.node("fl");
            b.add_vsource("V1", a, crate::netlist::NodeId::GROUND, Waveform::Dc(0.9));
            b.add_capacitor("C1", fl, a, 1e-15);
            if tie {
                b.add_resistor("RT", fl, crate::netlist::NodeId::GROUND, 1e12);
            }
            b.build().unwrap()
        };
        let opts = SolverOptions::default();
        let sol = dc_operating_point(&build(false), &opts, None).unwrap();
        assert_eq!(sol.converged_via, ConvergedVia::GminStepping);
        let tied = dc_operating_point(&build(true), &opts, None).unwrap();
        assert!((sol.node_voltages[2] - tied.node_voltages[2]).abs() < 1e-6);
    }
}
