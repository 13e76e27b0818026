//! Per-source energy accounting over a transient window.

use crate::solver::TransientTrace;

use super::AnalysisError;

/// Energy delivered by each source over a window, and the share carried by
/// bit-line drivers.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    /// Joules delivered per source label (positive: the source did work on
    /// the circuit).
    pub per_source: Vec<(String, f64)>,
    pub total: f64,
    /// Energy of bit-line driving sources over the total. Sources whose
    /// label contains `BL` or `BIT` (precharge rails included) count as
    /// bit-line drivers.
    pub bitline_fraction: f64,
}

impl EnergyReport {
    pub fn source_energy(&self, label: &str) -> Option<f64> {
        self.per_source.iter().find(|(l, _)| l == label).map(|(_, e)| *e)
    }

    pub fn bitline_energy(&self) -> f64 {
        self.per_source
            .iter()
            .filter(|(l, _)| is_bitline_label(l))
            .map(|(_, e)| *e)
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("source,energy_j\n");
        for (l, e) in &self.per_source {
            out.push_str(&format!("{l},{e:.17e}\n"));
        }
        out.push_str(&format!("total,{:.17e}\n", self.total));
        out.push_str(&format!("bitline_fraction,{:.17e}\n", self.bitline_fraction));
        out
    }
}

pub fn is_bitline_label(label: &str) -> bool {
    let u = label.to_ascii_uppercase();
    u.contains("BL") || u.contains("BIT")
}

/// Trapezoidal integral of v(t) * i(t) per source over `window`, snapped to
/// the trace's sample grid.
pub fn measure_energy(
    trace: &TransientTrace,
    window: (f64, f64),
) -> Result<EnergyReport, AnalysisError> {
    let (w0, w1) = window;
    if !(w1 > w0) || trace.times.len() < 2 {
        return Err(AnalysisError::EmptyWindow);
    }
    let i0 = trace.index_at(w0);
    let i1 = trace.index_at(w1);
    if i1 <= i0 {
        return Err(AnalysisError::EmptyWindow);
    }
    let mut per_source = Vec::with_capacity(trace.source_labels.len());
    for (s, label) in trace.source_labels.iter().enumerate() {
        let (na, nb) = trace.source_nodes[s];
        let p_at = |i: usize| -> f64 {
            let v = trace.node_voltages[i][na] - trace.node_voltages[i][nb];
            v * trace.source_currents[i][s]
        };
        let mut e = 0.0;
        for i in i0..i1 {
            let dt = trace.times[i + 1] - trace.times[i];
            e += 0.5 * (p_at(i) + p_at(i + 1)) * dt;
        }
        per_source.push((label.clone(), e));
    }
    let total: f64 = per_source.iter().map(|(_, e)| e).sum();
    let bitline: f64 = per_source
        .iter()
        .filter(|(l, _)| is_bitline_label(l))
        .map(|(_, e)| *e)
        .sum();
    let bitline_fraction = if total.abs() > 0.0 { bitline / total } else { 0.0 };
    Ok(EnergyReport { per_source, total, bitline_fraction })
}
