//! Small dense symmetric factorizations.

use crate::Real;

/// Outcome of factorizing a symmetric positive semidefinite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    n: usize,
    /// Lower factor, row-major; rows with a zero pivot are all zero.
    l: Vec<T>,
    zero_pivots: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NegativePivot {
    pub index: usize,
    pub value: f64,
}

impl<T: Real> Cholesky<T> {
    /// Factorizes `a` (row-major `n×n`). Pivots within `rel_tol · max|diag|`
    /// of zero are treated as exact zeros (the corresponding direction is
    /// dropped); clearly negative pivots are an error.
    pub fn new(n: usize, a: &[T], rel_tol: T) -> Result<Self, NegativePivot> {
        assert_eq!(a.len(), n * n);
        let scale = (0..n).fold(T::zero(), |m, i| m.max(a[i * n + i].abs()));
        let tol = rel_tol * scale;
        let mut l = vec![T::zero(); n * n];
        let mut zero_pivots = 0;
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d < -tol {
                return Err(NegativePivot { index: j, value: d.as_f64() });
            }
            if d <= tol {
                zero_pivots += 1;
                continue;
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in j + 1..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(Self { n, l, zero_pivots })
    }

    pub fn zero_pivots(&self) -> usize {
        self.zero_pivots
    }

    /// Solves in place; components along dropped pivots are set to zero.
    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = self.n;
        for i in 0..n {
            let d = self.l[i * n + i];
            if d == T::zero() {
                x[i] = T::zero();
                continue;
            }
            let mut s = x[i];
            for k in 0..i {
                s -= self.l[i * n + k] * x[k];
            }
            x[i] = s / d;
        }
        for i in (0..n).rev() {
            let d = self.l[i * n + i];
            if d == T::zero() {
                x[i] = T::zero();
                continue;
            }
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / d;
        }
    }
}
