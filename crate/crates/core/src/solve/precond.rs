use std::sync::Mutex;

use super::dense::Cholesky;
use super::SolveError;
use crate::sparse::CsrMatrix;
use crate::Real;

/// Symmetric approximate inverse `z = M⁻¹ r`.
pub trait Preconditioner<T: Real>: Send + Sync {
    fn apply(&self, r: &[T], z: &mut [T]);

    /// Applies the preconditioner to `k` interleaved vectors
    /// (`r[i * k + j]` is entry `i` of vector `j`).
    fn apply_multi(&self, k: usize, r: &[T], z: &mut [T]) {
        let n = r.len() / k;
        let mut rc = vec![T::zero(); n];
        let mut zc = vec![T::zero(); n];
        for j in 0..k {
            for i in 0..n {
                rc[i] = r[i * k + j];
            }
            self.apply(&rc, &mut zc);
            for i in 0..n {
                z[i * k + j] = zc[i];
            }
        }
    }
}

impl<T: Real, P: Preconditioner<T> + ?Sized> Preconditioner<T> for Box<P> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        (**self).apply(r, z)
    }

    fn apply_multi(&self, k: usize, r: &[T], z: &mut [T]) {
        (**self).apply_multi(k, r, z)
    }
}

/// Reusable buffers for preconditioners that need temporaries on every
/// application.
pub(crate) struct ScratchPool<T> {
    free: Mutex<Vec<Vec<T>>>,
}

impl<T: Real> ScratchPool<T> {
    pub fn new() -> Self {
        Self { free: Mutex::new(Vec::new()) }
    }

    /// A zeroed buffer of length `len`.
    pub fn take(&self, len: usize) -> Vec<T> {
        let mut pool = self.free.lock().unwrap_or_else(|e| e.into_inner());
        let mut v = match pool.iter().position(|v| v.capacity() >= len) {
            Some(i) => pool.swap_remove(i),
            None => pool.pop().unwrap_or_default(),
        };
        v.clear();
        v.resize(len, T::zero());
        v
    }

    pub fn put(&self, v: Vec<T>) {
        self.free.lock().unwrap_or_else(|e| e.into_inner()).push(v);
    }
}

pub struct Identity;

impl<T: Real> Preconditioner<T> for Identity {
    fn apply(&self, r: &[T], z: &mut [T]) {
        z.copy_from_slice(r);
    }

    fn apply_multi(&self, _k: usize, r: &[T], z: &mut [T]) {
        z.copy_from_slice(r);
    }
}

pub struct Jacobi<T> {
    inv_diag: Vec<T>,
}

impl<T: Real> Jacobi<T> {
    pub fn new(a: &CsrMatrix<T>) -> Result<Self, SolveError> {
        let d = a.diagonal();
        if let Some(i) = d.iter().position(|&v| v < T::zero()) {
            return Err(SolveError::Indefinite(format!("negative diagonal entry at row {i}")));
        }
        Ok(Self { inv_diag: d.iter().map(|&v| if v > T::zero() { T::one() / v } else { T::zero() }).collect() })
    }
}

impl<T: Real> Preconditioner<T> for Jacobi<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        for ((zi, &ri), &di) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * di;
        }
    }

    fn apply_multi(&self, k: usize, r: &[T], z: &mut [T]) {
        for ((zi, ri), &di) in z.chunks_exact_mut(k).zip(r.chunks_exact(k)).zip(&self.inv_diag) {
            for (a, &b) in zi.iter_mut().zip(ri) {
                *a = b * di;
            }
        }
    }
}

/// Inverses of the diagonal `b×b` blocks, stored densely.
pub struct BlockJacobi<T> {
    block: usize,
    pub(crate) inverses: Vec<T>,
}

impl<T: Real> BlockJacobi<T> {
    pub fn new(a: &CsrMatrix<T>, block: usize) -> Result<Self, SolveError> {
        if block == 0 || a.nrows() % block != 0 {
            return Err(SolveError::Config(format!("{} rows do not split into blocks of {block}", a.nrows())));
        }
        let nb = a.nrows() / block;
        let bb = block * block;
        let mut inverses = vec![T::zero(); nb * bb];
        let mut dense = vec![T::zero(); bb];
        let mut col = vec![T::zero(); block];
        for c in 0..nb {
            dense.iter_mut().for_each(|v| *v = T::zero());
            for i in 0..block {
                let (cols, vals) = a.row(c * block + i);
                for (&j, &v) in cols.iter().zip(vals) {
                    let j = j as usize;
                    if j >= c * block && j < (c + 1) * block {
                        dense[i * block + (j - c * block)] = v;
                    }
                }
            }
            let chol = Cholesky::new(block, &dense, T::lit(1e-12)).map_err(|p| {
                SolveError::Indefinite(format!(
                    "diagonal block {c} is not positive semidefinite (pivot {} = {:e})",
                    p.index, p.value
                ))
            })?;
            let inv = &mut inverses[c * bb..(c + 1) * bb];
            for j in 0..block {
                col.iter_mut().for_each(|v| *v = T::zero());
                col[j] = T::one();
                chol.solve_in_place(&mut col);
                for i in 0..block {
                    inv[i * block + j] = col[i];
                }
            }
        }
        Ok(Self { block, inverses })
    }

    pub fn block_size(&self) -> usize {
        self.block
    }

    /// `out = D_c⁻¹ v` for block `c`.
    #[inline]
    pub fn apply_block(&self, c: usize, v: &[T], out: &mut [T]) {
        let b = self.block;
        let inv = &self.inverses[c * b * b..(c + 1) * b * b];
        for i in 0..b {
            let row = &inv[i * b..(i + 1) * b];
            out[i] = row.iter().zip(v).map(|(&a, &x)| a * x).sum();
        }
    }
}

impl<T: Real> BlockJacobi<T> {
    /// `out += D_c⁻¹ v` for block `c` with `k` interleaved columns.
    #[inline]
    pub(crate) fn add_block_multi(&self, c: usize, k: usize, v: &[T], out: &mut [T]) {
        let b = self.block;
        let inv = &self.inverses[c * b * b..(c + 1) * b * b];
        for i in 0..b {
            let o = &mut out[i * k..(i + 1) * k];
            for (m, &a) in inv[i * b..(i + 1) * b].iter().enumerate() {
                for (oj, &vj) in o.iter_mut().zip(&v[m * k..(m + 1) * k]) {
                    *oj += a * vj;
                }
            }
        }
    }
}

impl<T: Real> Preconditioner<T> for BlockJacobi<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        let b = self.block;
        for c in 0..r.len() / b {
            self.apply_block(c, &r[c * b..(c + 1) * b], &mut z[c * b..(c + 1) * b]);
        }
    }

    fn apply_multi(&self, k: usize, r: &[T], z: &mut [T]) {
        let w = self.block * k;
        z.iter_mut().for_each(|v| *v = T::zero());
        for (c, (zc, rc)) in z.chunks_exact_mut(w).zip(r.chunks_exact(w)).enumerate() {
            self.add_block_multi(c, k, rc, zc);
        }
    }
}

/// Runs a preconditioner built in another precision.
pub struct MixedPrecision<P, U> {
    inner: P,
    _scalar: std::marker::PhantomData<U>,
}

impl<P, U> MixedPrecision<P, U> {
    pub fn new(inner: P) -> Self {
        Self { inner, _scalar: std::marker::PhantomData }
    }
}

impl<T: Real, U: Real, P: Preconditioner<U>> Preconditioner<T> for MixedPrecision<P, U> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        let ru: Vec<U> = r.iter().map(|&v| U::lit(v.as_f64())).collect();
        let mut zu = vec![U::zero(); r.len()];
        self.inner.apply(&ru, &mut zu);
        for (zi, &v) in z.iter_mut().zip(&zu) {
            *zi = T::lit(v.as_f64());
        }
    }

    fn apply_multi(&self, k: usize, r: &[T], z: &mut [T]) {
        let ru: Vec<U> = r.iter().map(|&v| U::lit(v.as_f64())).collect();
        let mut zu = vec![U::zero(); r.len()];
        self.inner.apply_multi(k, &ru, &mut zu);
        for (zi, &v) in z.iter_mut().zip(&zu) {
            *zi = T::lit(v.as_f64());
        }
    }
}

/// One Gauss-Seidel sweep on `A x = b` in correction form.
pub(crate) fn gauss_seidel<T: Real>(a: &CsrMatrix<T>, b: &[T], x: &mut [T], inv_diag: &[T], forward: bool) {
    let n = a.nrows();
    let mut step = |i: usize| {
        let (cols, vals) = a.row(i);
        let mut s = b[i];
        for (&c, &v) in cols.iter().zip(vals) {
            s -= v * x[c as usize];
        }
        x[i] += s * inv_diag[i];
    };
    if forward {
        (0..n).for_each(&mut step);
    } else {
        (0..n).rev().for_each(&mut step);
    }
}

/// One block Gauss-Seidel sweep with the diagonal-block inverses.
pub(crate) fn block_gauss_seidel<T: Real>(a: &CsrMatrix<T>, blocks: &BlockJacobi<T>, b: &[T], x: &mut [T], forward: bool) {
    let bs = blocks.block_size();
    let nb = a.nrows() / bs;
    let mut res = vec![T::zero(); bs];
    let mut corr = vec![T::zero(); bs];
    let mut step = |c: usize| {
        for i in 0..bs {
            let r = c * bs + i;
            let (cols, vals) = a.row(r);
            let mut s = b[r];
            for (&j, &v) in cols.iter().zip(vals) {
                s -= v * x[j as usize];
            }
            res[i] = s;
        }
        blocks.apply_block(c, &res, &mut corr);
        for i in 0..bs {
            x[c * bs + i] += corr[i];
        }
    };
    if forward {
        (0..nb).for_each(&mut step);
    } else {
        (0..nb).rev().for_each(&mut step);
    }
}

/// Gauss-Seidel sweep on `k` interleaved systems.
pub(crate) fn gauss_seidel_multi<T: Real>(a: &CsrMatrix<T>, k: usize, b: &[T], x: &mut [T], inv_diag: &[T], forward: bool) {
    match k {
        1 => gauss_seidel(a, b, x, inv_diag, forward),
        4 => gauss_seidel_fixed::<T, 4>(a, b, x, inv_diag, forward),
        8 => gauss_seidel_fixed::<T, 8>(a, b, x, inv_diag, forward),
        _ => {
            let n = b.len() / k;
            let mut rc = vec![T::zero(); n];
            let mut xc = vec![T::zero(); n];
            for j in 0..k {
                for i in 0..n {
                    rc[i] = b[i * k + j];
                    xc[i] = x[i * k + j];
                }
                gauss_seidel(a, &rc, &mut xc, inv_diag, forward);
                for i in 0..n {
                    x[i * k + j] = xc[i];
                }
            }
        }
    }
}

fn gauss_seidel_fixed<T: Real, const K: usize>(a: &CsrMatrix<T>, b: &[T], x: &mut [T], inv_diag: &[T], forward: bool) {
    let n = a.nrows();
    let mut step = |i: usize| {
        let (cols, vals) = a.row(i);
        let mut s: [T; K] = b[i * K..(i + 1) * K].try_into().expect("width K");
        for (&c, &v) in cols.iter().zip(vals) {
            let xc: &[T; K] = x[c as usize * K..(c as usize + 1) * K].try_into().expect("width K");
            for j in 0..K {
                s[j] -= v * xc[j];
            }
        }
        let d = inv_diag[i];
        for (xj, &sj) in x[i * K..(i + 1) * K].iter_mut().zip(&s) {
            *xj += sj * d;
        }
    };
    if forward {
        (0..n).for_each(&mut step);
    } else {
        (0..n).rev().for_each(&mut step);
    }
}

/// Block Gauss-Seidel sweep on `k` interleaved systems with 8×8 blocks.
pub(crate) fn block_gauss_seidel_multi<T: Real>(
    a: &CsrMatrix<T>,
    blocks: &BlockJacobi<T>,
    k: usize,
    b: &[T],
    x: &mut [T],
    forward: bool,
) {
    assert_eq!(blocks.block_size(), 8, "interleaved block sweeps assume 8×8 blocks");
    match k {
        1 => block_gauss_seidel(a, blocks, b, x, forward),
        4 => block_gauss_seidel_fixed::<T, 4>(a, blocks, b, x, forward),
        8 => block_gauss_seidel_fixed::<T, 8>(a, blocks, b, x, forward),
        _ => {
            let n = b.len() / k;
            let mut rc = vec![T::zero(); n];
            let mut xc = vec![T::zero(); n];
            for j in 0..k {
                for i in 0..n {
                    rc[i] = b[i * k + j];
                    xc[i] = x[i * k + j];
                }
                block_gauss_seidel(a, blocks, &rc, &mut xc, forward);
                for i in 0..n {
                    x[i * k + j] = xc[i];
                }
            }
        }
    }
}

fn block_gauss_seidel_fixed<T: Real, const K: usize>(
    a: &CsrMatrix<T>,
    blocks: &BlockJacobi<T>,
    b: &[T],
    x: &mut [T],
    forward: bool,
) {
    let nb = a.nrows() / 8;
    let mut step = |c: usize| {
        let mut res = [[T::zero(); K]; 8];
        for (i, s) in res.iter_mut().enumerate() {
            let r = c * 8 + i;
            let (cols, vals) = a.row(r);
            *s = b[r * K..(r + 1) * K].try_into().expect("width K");
            for (&j, &v) in cols.iter().zip(vals) {
                let xj: &[T; K] = x[j as usize * K..(j as usize + 1) * K].try_into().expect("width K");
                for m in 0..K {
                    s[m] -= v * xj[m];
                }
            }
        }
        let inv = &blocks.inverses[c * 64..(c + 1) * 64];
        for i in 0..8 {
            let mut corr = [T::zero(); K];
            for (m, &w) in inv[i * 8..(i + 1) * 8].iter().enumerate() {
                for j in 0..K {
                    corr[j] += w * res[m][j];
                }
            }
            for (xj, &cj) in x[(c * 8 + i) * K..(c * 8 + i + 1) * K].iter_mut().zip(&corr) {
                *xj += cj;
            }
        }
    };
    if forward {
        (0..nb).for_each(&mut step);
    } else {
        (0..nb).rev().for_each(&mut step);
    }
}
