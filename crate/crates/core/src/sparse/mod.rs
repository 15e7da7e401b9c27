//! Compressed sparse row storage and the handful of kernels the assembly and
//! solver layers need.

use std::io::Write;

use crate::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Builds from raw arrays; columns within a row must be strictly increasing.
    pub fn from_raw(nrows: usize, ncols: usize, row_ptr: Vec<usize>, col_idx: Vec<u32>, values: Vec<T>) -> Self {
        assert_eq!(row_ptr.len(), nrows + 1);
        assert_eq!(col_idx.len(), values.len());
        assert_eq!(*row_ptr.last().unwrap(), values.len());
        debug_assert!((0..nrows).all(|r| col_idx[row_ptr[r]..row_ptr[r + 1]].windows(2).all(|w| w[0] < w[1])));
        debug_assert!(col_idx.iter().all(|&c| (c as usize) < ncols));
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    /// Sums duplicate entries; drops nothing.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for r in 0..nrows {
            counts[r + 1] += counts[r];
        }
        let mut order = vec![(0u32, T::zero()); triplets.len()];
        let mut fill = counts.clone();
        for &(r, c, v) in triplets {
            assert!(c < ncols, "column {c} out of range");
            order[fill[r]] = (c as u32, v);
            fill[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..nrows {
            let row = &mut order[counts[r]..counts[r + 1]];
            row.sort_by_key(|e| e.0);
            for &(c, v) in row.iter() {
                if col_idx.len() > row_ptr[r] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(values.len());
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut t = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    t.push((r, c, v));
                }
            }
        }
        Self::from_triplets(rows.len(), ncols, &t)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_raw(n, n, (0..=n).collect(), (0..n as u32).collect(), vec![T::one(); n])
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[u32] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Column indices and values of row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> (&[u32], &[T]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (cols, vals) = self.row(r);
        cols.binary_search(&(c as u32)).map_or(T::zero(), |k| vals[k])
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (r, yr) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            let mut s = T::zero();
            for (&c, &v) in cols.iter().zip(vals) {
                s += v * x[c as usize];
            }
            *yr = s;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.matvec(x, &mut y);
        y
    }

    /// `y = A X` for `k` right-hand sides stored interleaved (`x[i * k + j]`).
    pub fn matmul_interleaved(&self, k: usize, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols * k);
        assert_eq!(y.len(), self.nrows * k);
        match k {
            1 => self.matvec(x, y),
            4 => self.matmul_fixed::<4>(x, y),
            8 => self.matmul_fixed::<8>(x, y),
            _ => {
                for r in 0..self.nrows {
                    let (cols, vals) = self.row(r);
                    let yr = &mut y[r * k..(r + 1) * k];
                    yr.iter_mut().for_each(|v| *v = T::zero());
                    for (&c, &v) in cols.iter().zip(vals) {
                        let xc = &x[c as usize * k..(c as usize + 1) * k];
                        for (a, &b) in yr.iter_mut().zip(xc) {
                            *a += v * b;
                        }
                    }
                }
            }
        }
    }

    fn matmul_fixed<const K: usize>(&self, x: &[T], y: &mut [T]) {
        for (r, yr) in y.chunks_exact_mut(K).enumerate() {
            let (cols, vals) = self.row(r);
            let mut acc = [T::zero(); K];
            for (&c, &v) in cols.iter().zip(vals) {
                let xc: &[T; K] = x[c as usize * K..(c as usize + 1) * K].try_into().expect("width K");
                for j in 0..K {
                    acc[j] += v * xc[j];
                }
            }
            yr.copy_from_slice(&acc);
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows.min(self.ncols)).map(|r| self.get(r, r)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c as usize + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let mut fill = counts.clone();
        let mut col_idx = vec![0u32; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let slot = fill[c as usize];
                col_idx[slot] = r as u32;
                values[slot] = v;
                fill[c as usize] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, row_ptr: counts, col_idx, values }
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut marker = vec![usize::MAX; other.ncols];
        let mut acc = vec![T::zero(); other.ncols];
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut touched: Vec<u32> = Vec::new();
        row_ptr.push(0);
        for r in 0..self.nrows {
            touched.clear();
            let (ac, av) = self.row(r);
            for (&k, &a) in ac.iter().zip(av) {
                let (bc, bv) = other.row(k as usize);
                for (&c, &b) in bc.iter().zip(bv) {
                    let c = c as usize;
                    if marker[c] != r {
                        marker[c] = r;
                        acc[c] = T::zero();
                        touched.push(c as u32);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                col_idx.push(c);
                values.push(acc[c as usize]);
            }
            row_ptr.push(values.len());
        }
        Self { nrows: self.nrows, ncols: other.ncols, row_ptr, col_idx, values }
    }

    pub fn scale(&mut self, s: T) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `max |A_ij - A_ji|`.
    pub fn symmetry_defect(&self) -> T {
        if self.nrows != self.ncols {
            return T::infinity();
        }
        let mut worst = T::zero();
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(c as usize, r)).abs());
            }
        }
        worst
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> T {
        self.values.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.ncols]; self.nrows];
        for (r, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c as usize] = v;
            }
        }
        d
    }

    /// Removes stored entries with `|a| <= threshold`.
    pub fn prune(&mut self, threshold: T) {
        let mut out = 0;
        let mut new_ptr = Vec::with_capacity(self.nrows + 1);
        new_ptr.push(0);
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.values[k].abs() > threshold {
                    self.values[out] = self.values[k];
                    self.col_idx[out] = self.col_idx[k];
                    out += 1;
                }
            }
            new_ptr.push(out);
        }
        self.values.truncate(out);
        self.col_idx.truncate(out);
        self.row_ptr = new_ptr;
    }

    /// Converts the value type.
    pub fn cast<U: Real>(&self) -> CsrMatrix<U> {
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }

    /// Coordinate dump, one `row col block_row block_col value` line per entry.
    pub fn write_triplets<W: Write>(&self, block_size: usize, mut out: W) -> std::io::Result<()> {
        writeln!(out, "% {} {} {} block_size={}", self.nrows, self.ncols, self.nnz(), block_size)?;
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let c = c as usize;
                writeln!(out, "{r} {c} {} {} {:.17e}", r / block_size, c / block_size, v.as_f64())?;
            }
        }
        Ok(())
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `y += alpha x`.
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
