//! Fixed-step implicit transient integration. Source breakpoints are forced
//! onto the time grid, so piecewise-linear stimuli are integrated exactly at
//! their corners.

use crate::netlist::{Circuit, ElementValue, NodeId};
use crate::solver::stamp::{Assembler, Companion};
use crate::solver::{dc_operating_point, newton, DcSolution, SolverError, SolverOptions};

/// Time series of node voltages and source branch currents.
#[derive(Debug, Clone)]
pub struct TransientTrace {
    /// Strictly increasing sample times (s).
    pub times: Vec<f64>,
    /// One row per time; node voltages indexed by node id (ground included).
    pub node_voltages: Vec<Vec<f64>>,
    /// One row per time; current delivered out of each source's positive
    /// terminal, ordered as `source_labels`.
    pub source_currents: Vec<Vec<f64>>,
    pub source_labels: Vec<String>,
    /// Source terminal nodes (positive, negative), aligned with
    /// `source_labels`; lets energy accounting recover v(t) across each
    /// source from the node voltages.
    pub source_nodes: Vec<(usize, usize)>,
    /// Port name -> node id, for export and lookups.
    pub ports: Vec<(String, usize)>,
}

impl TransientTrace {
    pub fn node_series(&self, node: NodeId) -> impl Iterator<Item = f64> + '_ {
        self.node_voltages.iter().map(move |row| row[node.0])
    }

    pub fn port_node(&self, name: &str) -> Option<NodeId> {
        self.ports.iter().find(|(p, _)| p == name).map(|(_, n)| NodeId(*n))
    }

    /// Index of the sample closest to `t`.
    pub fn index_at(&self, t: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, ti) in self.times.iter().enumerate() {
            let d = (ti - t).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }

    pub fn value_at(&self, node: NodeId, t: f64) -> f64 {
        self.node_voltages[self.index_at(t)][node.0]
    }

    pub fn source_index(&self, label: &str) -> Option<usize> {
        self.source_labels.iter().position(|l| l == label)
    }

    /// CSV export: `time` column, one column per named port, then one
    /// current column per source, full double precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("time");
        for (name, _) in &self.ports {
            out.push(',');
            out.push_str(name);
        }
        for label in &self.source_labels {
            out.push_str(",I(");
            out.push_str(label);
            out.push(')');
        }
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            out.push_str(&format!("{t:.17e}"));
            for (_, node) in &self.ports {
                out.push_str(&format!(",{:.17e}", self.node_voltages[i][*node]));
            }
            for v in &self.source_currents[i] {
                out.push_str(&format!(",{v:.17e}"));
            }
            out.push('\n');
        }
        out
    }
}

fn build_grid(circuit: &Circuit, t_end: f64, dt: f64) -> Vec<f64> {
    let mut ts = Vec::new();
    let mut k = 0usize;
    loop {
        let t = k as f64 * dt;
        if t >= t_end {
            break;
        }
        ts.push(t);
        k += 1;
    }
    ts.push(t_end);
    for e in &circuit.elements {
        if let ElementValue::Source(w) = &e.value {
            for (bt, _) in w.breakpoints() {
                if *bt > 0.0 && *bt < t_end {
                    ts.push(*bt);
                }
            }
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let eps = t_end * 1e-12 + 1e-21;
    let mut grid = Vec::with_capacity(ts.len());
    for t in ts {
        if grid.last().map(|&last: &f64| t - last > eps).unwrap_or(true) {
            grid.push(t);
        }
    }
    grid
}

/// Integrates the circuit over `[0, t_end]`.
///
/// The initial condition is `initial` when given (it must come from the same
/// circuit; bit lines precharged by hand are set up this way), otherwise the
/// DC operating point at the t = 0 source values.
pub fn transient(
    circuit: &Circuit,
    t_end: f64,
    opts: &SolverOptions,
    initial: Option<&DcSolution>,
) -> Result<TransientTrace, SolverError> {
    let mut asm = Assembler::new(circuit);
    let n_unknowns = asm.layout.n_unknowns();

    let init: DcSolution = match initial {
        Some(s) => {
            if s.raw.len() != n_unknowns {
                return Err(SolverError::DimensionMismatch { want: n_unknowns, got: s.raw.len() });
            }
            s.clone()
        }
        None => dc_operating_point(circuit, opts, None)?,
    };

    let waveforms: Vec<&crate::waveform::Waveform> = asm
        .layout
        .source_elem
        .iter()
        .map(|&ei| match &circuit.elements[ei].value {
            ElementValue::Source(w) => w,
            _ => unreachable!(),
        })
        .collect();
    let source_labels: Vec<String> = asm
        .layout
        .source_elem
        .iter()
        .map(|&ei| circuit.elements[ei].label.clone())
        .collect();
    let source_nodes: Vec<(usize, usize)> = asm
        .layout
        .source_elem
        .iter()
        .map(|&ei| {
            let e = &circuit.elements[ei];
            (e.terminals[0].0, e.terminals[1].0)
        })
        .collect();

    let grid = build_grid(circuit, t_end, opts.dt);
    let mut x = init.raw.clone();

    // Companion history from the initial point: branch voltages at rest,
    // zero branch current (capacitors are open in DC).
    let mut comp = Companion::at_rest(&asm.layout);
    comp.method = opts.integrator;
    let volt_of = |x: &[f64], n: NodeId| -> f64 {
        if n.is_ground() {
            0.0
        } else {
            x[n.0 - 1]
        }
    };
    for (ei, e) in circuit.elements.iter().enumerate() {
        if let Some(slot) = asm.layout.cap_slot[ei] {
            comp.v_prev[slot] = volt_of(&x, e.terminals[0]) - volt_of(&x, e.terminals[1]);
            comp.i_prev[slot] = 0.0;
        }
    }

    let n_nodes = circuit.node_count;
    let mut trace = TransientTrace {
        times: Vec::with_capacity(grid.len()),
        node_voltages: Vec::with_capacity(grid.len()),
        source_currents: Vec::with_capacity(grid.len()),
        source_labels,
        source_nodes,
        ports: circuit.ports.iter().map(|(k, v)| (k.clone(), v.0)).collect(),
    };
    let record = |trace: &mut TransientTrace, t: f64, x: &[f64]| {
        let mut row = vec![0.0; n_nodes];
        for i in 0..n_nodes - 1 {
            row[i + 1] = x[i];
        }
        trace.times.push(t);
        trace.node_voltages.push(row);
        trace
            .source_currents
            .push((0..waveforms.len()).map(|s| -x[n_nodes - 1 + s]).collect());
    };
    record(&mut trace, grid[0], &x);

    for w in grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let h = t1 - t0;
        comp.h = h;
        let source_vals: Vec<f64> = waveforms.iter().map(|wf| wf.value_at(t1)).collect();
        newton(&mut asm, &mut x, &source_vals, Some(&comp), 0.0, opts).map_err(|e| match e {
            SolverError::NonConvergence { residual, .. } => {
                SolverError::NonConvergence { residual, at: Some(t1) }
            }
            SolverError::SingularMatrix { row, .. } => {
                SolverError::SingularMatrix { row, at: Some(t1) }
            }
            other => other,
        })?;
        for (ei, e) in circuit.elements.iter().enumerate() {
            if let Some(slot) = asm.layout.cap_slot[ei] {
                if let ElementValue::Capacitance(c) = &e.value {
                    let v_now = volt_of(&x, e.terminals[0]) - volt_of(&x, e.terminals[1]);
                    let i_now = if *c == 0.0 {
                        0.0
                    } else {
                        comp.geq(*c) * v_now + comp.hist(*c, slot)
                    };
                    comp.v_prev[slot] = v_now;
                    comp.i_prev[slot] = i_now;
                }
            }
        }
        record(&mut trace, t1, &x);
    }
    Ok(trace)
}
