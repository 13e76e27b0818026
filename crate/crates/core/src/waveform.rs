//! Source waveforms: DC levels and piecewise-linear sequences.

/// Voltage-source waveform.
#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    Dc(f64),
    /// (time, value) knots, strictly increasing in time. The value is held
    /// constant before the first and after the last knot.
    Pwl(Vec<(f64, f64)>),
}

impl Waveform {
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            Waveform::Dc(v) => *v,
            Waveform::Pwl(pts) => {
                if pts.is_empty() {
                    return 0.0;
                }
                if t <= pts[0].0 {
                    return pts[0].1;
                }
                if t >= pts[pts.len() - 1].0 {
                    return pts[pts.len() - 1].1;
                }
                let i = pts.partition_point(|p| p.0 <= t);
                let (t0, v0) = pts[i - 1];
                let (t1, v1) = pts[i];
                if t1 == t0 {
                    v1
                } else {
                    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
                }
            }
        }
    }

    /// DC value used by operating-point analysis (the value at t = 0).
    pub fn dc_value(&self) -> f64 {
        self.value_at(0.0)
    }

    /// Time knots that must land on the integration grid.
    pub fn breakpoints(&self) -> &[(f64, f64)] {
        match self {
            Waveform::Dc(_) => &[],
            Waveform::Pwl(pts) => pts,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pwl_interpolates_and_clamps() {
        let w = Waveform::Pwl(vec![(1.0, 0.0), (2.0, 1.0)]);
        assert_eq!(w.value_at(0.0), 0.0);
        assert_eq!(w.value_at(1.5), 0.5);
        assert_eq!(w.value_at(3.0), 1.0);
    }

    #[test]
    fn dc_is_flat() {
        let w = Waveform::Dc(0.9);
        assert_eq!(w.value_at(-1.0), 0.9);
        assert_eq!(w.value_at(5.0), 0.9);
    }
}
