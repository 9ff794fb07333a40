//! Truncated double power series with log-scaled terms and a geometric tail
//! estimate for the omitted part.

use crate::summation::CompensatedSum;

/// Grid of log-magnitudes `ln |a_{nm}|` for `n < n_len`, `m < m_len`,
/// together with their maximum, used as a common scale.
pub(crate) struct LogGrid {
    pub n_len: usize,
    pub m_len: usize,
    ln: Vec<f64>,
    pub scale: f64,
}

impl LogGrid {
    pub fn new(n_len: usize, m_len: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut ln = Vec::with_capacity(n_len * m_len);
        let mut scale = f64::NEG_INFINITY;
        for n in 0..n_len {
            for m in 0..m_len {
                let v = f(n, m);
                scale = scale.max(v);
                ln.push(v);
            }
        }
        Self {
            n_len,
            m_len,
            ln,
            scale,
        }
    }

    /// `|a_{nm}| / e^scale`.
    #[inline]
    pub fn scaled(&self, n: usize, m: usize) -> f64 {
        let v = self.ln[n * self.m_len + m];
        if v == f64::NEG_INFINITY {
            0.0
        } else {
            (v - self.scale).exp()
        }
    }

    /// `Σ c_{nm} a_{nm} / e^scale`.
    pub fn sum(&self, coef: impl Fn(usize, usize) -> f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for n in 0..self.n_len {
            for m in 0..self.m_len {
                let w = self.scaled(n, m);
                if w != 0.0 {
                    acc.add(coef(n, m) * w);
                }
            }
        }
        acc.value()
    }

    /// Estimated omitted tail of `Σ |c_{nm}| a_{nm}` relative to the retained
    /// sum, from geometric fits to the last row sums and last column sums.
    /// Directions with a single retained index are treated as exact.
    pub fn relative_tail(&self, coef_abs: impl Fn(usize, usize) -> f64) -> f64 {
        let mut rows = vec![0.0; self.n_len];
        let mut cols = vec![0.0; self.m_len];
        let mut total = CompensatedSum::new();
        for (n, row) in rows.iter_mut().enumerate() {
            for (m, col) in cols.iter_mut().enumerate() {
                let v = coef_abs(n, m) * self.scaled(n, m);
                *row += v;
                *col += v;
                total.add(v);
            }
        }
        let total = total.value();
        if total == 0.0 {
            return 0.0;
        }
        let tail = geometric_tail(&rows) + geometric_tail(&cols);
        tail / total
    }
}

/// Tail `Σ_{k > K} s_k` of a nonnegative sequence fitted as geometric from its
/// last three retained terms; infinite when the ratio is not below 1.
pub(crate) fn geometric_tail(seq: &[f64]) -> f64 {
    let k = seq.len();
    if k <= 1 {
        return 0.0;
    }
    let last = seq[k - 1];
    if last == 0.0 {
        return 0.0;
    }
    let prev = seq[k - 2];
    if prev == 0.0 {
        return f64::INFINITY;
    }
    let mut q = last / prev;
    if k >= 3 && seq[k - 3] > 0.0 {
        q = q.max(prev / seq[k - 3]);
    }
    if q >= 1.0 {
        f64::INFINITY
    } else {
        last * q / (1.0 - q)
    }
}
