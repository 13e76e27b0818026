//! Dense LU with partial pivoting. System sizes here stay around 30 or
//! less, so anything fancier than a flat row-major buffer is not worth it.

#[derive(Debug, Clone)]
pub struct DenseMatrix {
    pub n: usize,
    pub a: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, a: vec![0.0; n * n] }
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        self.a[row * self.n + col] += v;
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.a[row * self.n + col]
    }

    pub fn clear(&mut self) {
        self.a.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Solves `A x = b` in place, returning `x`. Fails on a pivot smaller
    /// than `tiny` relative to the largest entry of the matrix.
    pub fn solve(&mut self, mut b: Vec<f64>) -> Result<Vec<f64>, SingularMatrix> {
        let n = self.n;
        if n == 0 {
            return Ok(b);
        }
        let scale = self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = if scale > 0.0 { scale * 1e-14 } else { f64::MIN_POSITIVE };
        for k in 0..n {
            let mut piv = k;
            let mut best = self.get(k, k).abs();
            for r in (k + 1)..n {
                let v = self.get(r, k).abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if !(best > tiny) || !best.is_finite() {
                return Err(SingularMatrix { row: k });
            }
            if piv != k {
                for c in 0..n {
                    self.a.swap(k * n + c, piv * n + c);
                }
                b.swap(k, piv);
            }
            let d = self.get(k, k);
            for r in (k + 1)..n {
                let f = self.get(r, k) / d;
                if f == 0.0 {
                    continue;
                }
                for c in (k + 1)..n {
                    let v = self.get(k, c);
                    self.a[r * n + c] -= f * v;
                }
                b[r] -= f * b[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for c in (k + 1)..n {
                s -= self.get(k, c) * b[c];
            }
            b[k] = s / self.get(k, k);
        }
        Ok(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingularMatrix {
    pub row: usize,
}
