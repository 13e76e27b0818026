//! MNA assembly: one KCL row per non-ground node plus one branch row per
//! voltage source. Assembles the residual `f(x)` and Jacobian `J(x)` at a
//! given state; Newton then solves `J dx = -f`.

use crate::netlist::{Circuit, ElementValue, NodeId};
use crate::solver::lu::DenseMatrix;
use crate::solver::IntegratorKind;

#[inline]
fn node_row(n: NodeId) -> Option<usize> {
    if n.is_ground() {
        None
    } else {
        Some(n.0 - 1)
    }
}

#[inline]
fn volt(x: &[f64], n: NodeId) -> f64 {
    if n.is_ground() {
        0.0
    } else {
        x[n.0 - 1]
    }
}

/// Index bookkeeping for a circuit's MNA system.
#[derive(Debug, Clone)]
pub struct MnaLayout {
    pub n_free: usize,
    pub n_sources: usize,
    /// Element index -> source slot (for VSource elements).
    pub source_slot: Vec<Option<usize>>,
    /// Source slot -> element index.
    pub source_elem: Vec<usize>,
    /// Element index -> capacitor slot.
    pub cap_slot: Vec<Option<usize>>,
    pub n_caps: usize,
}

impl MnaLayout {
    pub fn new(circuit: &Circuit) -> Self {
        let n_free = circuit.node_count - 1;
        let mut source_slot = vec![None; circuit.elements.len()];
        let mut cap_slot = vec![None; circuit.elements.len()];
        let mut source_elem = Vec::new();
        let mut n_caps = 0;
        for (i, e) in circuit.elements.iter().enumerate() {
            match &e.value {
                ElementValue::Source(_) => {
                    source_slot[i] = Some(source_elem.len());
                    source_elem.push(i);
                }
                ElementValue::Capacitance(_) => {
                    cap_slot[i] = Some(n_caps);
                    n_caps += 1;
                }
                _ => {}
            }
        }
        MnaLayout {
            n_free,
            n_sources: source_elem.len(),
            source_slot,
            source_elem,
            cap_slot,
            n_caps,
        }
    }

    pub fn n_unknowns(&self) -> usize {
        self.n_free + self.n_sources
    }

    pub fn source_row(&self, slot: usize) -> usize {
        self.n_free + slot
    }
}

/// Capacitor companion-model history for one transient step.
#[derive(Debug, Clone)]
pub struct Companion {
    pub method: IntegratorKind,
    /// Step size feeding this companion (s).
    pub h: f64,
    /// Capacitor branch voltage at the previous accepted time point.
    pub v_prev: Vec<f64>,
    /// Capacitor branch current at the previous accepted time point.
    pub i_prev: Vec<f64>,
}

impl Companion {
    pub fn at_rest(layout: &MnaLayout) -> Self {
        Companion {
            method: IntegratorKind::Trapezoidal,
            h: 0.0,
            v_prev: vec![0.0; layout.n_caps],
            i_prev: vec![0.0; layout.n_caps],
        }
    }

    pub fn geq(&self, c: f64) -> f64 {
        match self.method {
            IntegratorKind::BackwardEuler => c / self.h,
            IntegratorKind::Trapezoidal => 2.0 * c / self.h,
        }
    }

    /// History current term so that i = geq * v + hist.
    pub fn hist(&self, c: f64, slot: usize) -> f64 {
        let geq = self.geq(c);
        match self.method {
            IntegratorKind::BackwardEuler => -geq * self.v_prev[slot],
            IntegratorKind::Trapezoidal => -geq * self.v_prev[slot] - self.i_prev[slot],
        }
    }
}

#[inline]
fn stamp_pair(
    jac: &mut DenseMatrix,
    res: &mut [f64],
    a: NodeId,
    b: NodeId,
    i: f64,
    g: f64,
) {
    if let Some(ra) = node_row(a) {
        res[ra] += i;
        jac.add(ra, ra, g);
        if let Some(cb) = node_row(b) {
            jac.add(ra, cb, -g);
        }
    }
    if let Some(rb) = node_row(b) {
        res[rb] -= i;
        jac.add(rb, rb, g);
        if let Some(ca) = node_row(a) {
            jac.add(rb, ca, -g);
        }
    }
}

/// Reusable assembly workspace for one circuit.
pub struct Assembler<'c> {
    pub circuit: &'c Circuit,
    pub layout: MnaLayout,
    pub jac: DenseMatrix,
    pub res: Vec<f64>,
}

impl<'c> Assembler<'c> {
    pub fn new(circuit: &'c Circuit) -> Self {
        let layout = MnaLayout::new(circuit);
        let n = layout.n_unknowns();
        Assembler { circuit, layout, jac: DenseMatrix::zeros(n), res: vec![0.0; n] }
    }

    /// Assembles J and f at state `x`.
    ///
    /// `source_vals` holds one value per source slot. `companion` enables
    /// capacitor stamping (transient); DC treats capacitors as open.
    /// `gshunt` adds a conductance to ground on every node row (gmin
    /// stepping); zero disables it.
    pub fn assemble(
        &mut self,
        x: &[f64],
        source_vals: &[f64],
        companion: Option<&Companion>,
        gshunt: f64,
    ) {
        let Assembler { circuit, layout, jac, res } = self;
        jac.clear();
        res.iter_mut().for_each(|v| *v = 0.0);
        for (ei, e) in circuit.elements.iter().enumerate() {
            match &e.value {
                ElementValue::Resistance(r) => {
                    let (a, b) = (e.terminals[0], e.terminals[1]);
                    let g = 1.0 / *r;
                    let i = g * (volt(x, a) - volt(x, b));
                    stamp_pair(jac, res, a, b, i, g);
                }
                ElementValue::Capacitance(c) => {
                    if let Some(comp) = companion {
                        if *c == 0.0 {
                            continue;
                        }
                        let slot = layout.cap_slot[ei].unwrap();
                        let (a, b) = (e.terminals[0], e.terminals[1]);
                        let geq = comp.geq(*c);
                        let i = geq * (volt(x, a) - volt(x, b)) + comp.hist(*c, slot);
                        stamp_pair(jac, res, a, b, i, geq);
                    }
                }
                ElementValue::Source(_) => {
                    let slot = layout.source_slot[ei].unwrap();
                    let (a, b) = (e.terminals[0], e.terminals[1]);
                    let sr = layout.source_row(slot);
                    let i_br = x[sr];
                    if let Some(ra) = node_row(a) {
                        res[ra] += i_br;
                        jac.add(ra, sr, 1.0);
                        jac.add(sr, ra, 1.0);
                    }
                    if let Some(rb) = node_row(b) {
                        res[rb] -= i_br;
                        jac.add(rb, sr, -1.0);
                        jac.add(sr, rb, -1.0);
                    }
                    res[sr] += volt(x, a) - volt(x, b) - source_vals[slot];
                }
                ElementValue::Cntfet(dev) => {
                    let (d, g, s) = (e.terminals[0], e.terminals[1], e.terminals[2]);
                    let (vd, vg, vs) = (volt(x, d), volt(x, g), volt(x, s));
                    let i = dev.drain_current(vg - vs, vd - vs);
                    let (gm, gds) = dev.conductances(vg - vs, vd - vs);
                    let rd = node_row(d);
                    let rg = node_row(g);
                    let rs = node_row(s);
                    if let Some(r) = rd {
                        res[r] += i;
                        jac.add(r, r, gds);
                        if let Some(cg) = rg {
                            jac.add(r, cg, gm);
                        }
                        if let Some(cs) = rs {
                            jac.add(r, cs, -(gm + gds));
                        }
                    }
                    if let Some(r) = rs {
                        res[r] -= i;
                        if let Some(cd) = rd {
                            jac.add(r, cd, -gds);
                        }
                        if let Some(cg) = rg {
                            jac.add(r, cg, -gm);
                        }
                        jac.add(r, r, gm + gds);
                    }
                }
            }
        }
        if gshunt > 0.0 {
            for n in 0..layout.n_free {
                jac.add(n, n, gshunt);
                res[n] += gshunt * x[n];
            }
        }
    }

    /// Recomputes the KCL residual (A) at `x` from the element equations and
    /// returns the largest magnitude over node rows not pinned by a source.
    /// Capacitors contribute through `companion` when given.
    pub fn kcl_residual(
        &mut self,
        x: &[f64],
        source_vals: &[f64],
        companion: Option<&Companion>,
    ) -> f64 {
        self.assemble(x, source_vals, companion, 0.0);
        let mut pinned = vec![false; self.layout.n_free];
        for &ei in &self.layout.source_elem {
            for t in &self.circuit.elements[ei].terminals {
                if let Some(r) = node_row(*t) {
                    pinned[r] = true;
                }
            }
        }
        let mut worst: f64 = 0.0;
        for n in 0..self.layout.n_free {
            if !pinned[n] {
                worst = worst.max(self.res[n].abs());
            }
        }
        worst
    }
}
