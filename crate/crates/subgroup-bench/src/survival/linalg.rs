//! Dense symmetric positive-definite solves via Cholesky.
//!
//! The Newton systems in this crate are small (a few hundred columns at
//! most), so a plain row-major Cholesky keeps the crate free of external
//! BLAS/LAPACK linkage while staying bit-for-bit deterministic.

use ndarray::{Array1, Array2, ArrayView2};

/// Cholesky factor L (lower triangular, row-major) of a SPD matrix.
pub struct Cholesky {
    l: Array2<f64>,
    n: usize,
}

impl Cholesky {
    /// Factors `a` (assumed symmetric; only the lower triangle is read).
    /// Returns `None` if a pivot is not strictly positive.
    pub fn new(a: ArrayView2<f64>) -> Option<Cholesky> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "matrix must be square");
        let mut l = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[[i, j]];
                for k in 0..j {
                    sum -= l[[i, k]] * l[[j, k]];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return None;
                    }
                    l[[i, i]] = sum.sqrt();
                } else {
                    l[[i, j]] = sum / l[[j, j]];
                }
            }
        }
        Some(Cholesky { l, n })
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &Array1<f64>) -> Array1<f64> {
        assert_eq!(b.len(), self.n);
        // Forward substitution: L y = b.
        let mut y = b.clone();
        for i in 0..self.n {
            for k in 0..i {
                let t = self.l[[i, k]] * y[k];
                y[i] -= t;
            }
            y[i] /= self.l[[i, i]];
        }
        // Backward substitution: L^T x = y.
        let mut x = y;
        for i in (0..self.n).rev() {
            for k in (i + 1)..self.n {
                let t = self.l[[k, i]] * x[k];
                x[i] -= t;
            }
            x[i] /= self.l[[i, i]];
        }
        x
    }

    /// Full inverse, column by column. Fine at the sizes used here.
    pub fn inverse(&self) -> Array2<f64> {
        let mut inv = Array2::<f64>::zeros((self.n, self.n));
        for j in 0..self.n {
            let mut e = Array1::<f64>::zeros(self.n);
            e[j] = 1.0;
            let col = self.solve(&e);
            inv.column_mut(j).assign(&col);
        }
        inv
    }
}

/// Solves a SPD system with escalating diagonal jitter when the bare matrix
/// fails to factor. Returns the solution and the inverse used for covariance,
/// or `None` when even heavy jitter cannot make the matrix factorable.
pub fn solve_spd_with_jitter(
    a: &Array2<f64>,
    b: &Array1<f64>,
) -> Option<(Array1<f64>, Cholesky)> {
    if let Some(ch) = Cholesky::new(a.view()) {
        let x = ch.solve(b);
        if x.iter().all(|v| v.is_finite()) {
            return Some((x, ch));
        }
    }
    // Scale-aware jitter: fractions of the largest diagonal entry.
    let diag_max = (0..a.nrows())
        .map(|i| a[[i, i]].abs())
        .fold(0.0_f64, f64::max)
        .max(1e-12);
    let mut jitter = diag_max * 1e-10;
    for _ in 0..12 {
        let mut aj = a.clone();
        for i in 0..a.nrows() {
            aj[[i, i]] += jitter;
        }
        if let Some(ch) = Cholesky::new(aj.view()) {
            let x = ch.solve(b);
            if x.iter().all(|v| v.is_finite()) {
                return Some((x, ch));
            }
        }
        jitter *= 10.0;
    }
    None
}
