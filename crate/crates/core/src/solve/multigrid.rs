//! Geometric multigrid on the vertex lattice (CG) and the two-level
//! auxiliary-space preconditioner for the DG operator built on top of it.

use super::dense::Cholesky;
use super::precond::{
    block_gauss_seidel, block_gauss_seidel_multi, gauss_seidel_multi, BlockJacobi, Preconditioner, ScratchPool,
};
use super::SolveError;
use crate::femcore::{quadrature_rule, BasisSet, QuadratureEntity};
use crate::sparse::CsrMatrix;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MultigridOptions {
    /// Stop coarsening once a level has at most this many unknowns.
    pub coarse_size: usize,
    pub max_levels: usize,
    /// Gauss-Seidel sweeps before and after the coarse correction.
    pub smoothing_steps: usize,
}

impl Default for MultigridOptions {
    fn default() -> Self {
        Self { coarse_size: 1500, max_levels: 12, smoothing_steps: 1 }
    }
}

struct Level<T> {
    a: CsrMatrix<T>,
    inv_diag: Vec<T>,
    /// Interpolation from the next coarser level.
    p: CsrMatrix<T>,
    pt: CsrMatrix<T>,
}

/// Galerkin V-cycle with trilinear interpolation between vertex lattices
/// of spacing `h, 2h, 4h, ...`, symmetric Gauss-Seidel smoothing and a
/// dense solve on the coarsest level.
pub struct GeometricMultigrid<T> {
    levels: Vec<Level<T>>,
    coarse_a: CsrMatrix<T>,
    coarse: Cholesky<T>,
    smoothing_steps: usize,
    scratch: ScratchPool<T>,
}

fn interpolation<T: Real>(ijk: &[[u32; 3]]) -> (CsrMatrix<T>, Vec<[u32; 3]>) {
    let dims = [0, 1, 2].map(|d| ijk.iter().map(|p| p[d] / 2 + 2).max().unwrap_or(1) as usize);
    let index = |p: [u32; 3]| (p[0] as usize * dims[1] + p[1] as usize) * dims[2] + p[2] as usize;
    let parents = |x: u32| -> ([u32; 2], usize) {
        if x % 2 == 0 {
            ([x / 2, 0], 1)
        } else {
            ([x / 2, x / 2 + 1], 2)
        }
    };
    let mut id = vec![u32::MAX; dims[0] * dims[1] * dims[2]];
    for p in ijk {
        let (px, nx) = parents(p[0]);
        let (py, ny) = parents(p[1]);
        let (pz, nz) = parents(p[2]);
        for &a in &px[..nx] {
            for &b in &py[..ny] {
                for &c in &pz[..nz] {
                    id[index([a, b, c])] = 0;
                }
            }
        }
    }
    let mut coarse = Vec::new();
    for a in 0..dims[0] {
        for b in 0..dims[1] {
            for c in 0..dims[2] {
                let k = (a * dims[1] + b) * dims[2] + c;
                if id[k] == 0 {
                    id[k] = coarse.len() as u32;
                    coarse.push([a as u32, b as u32, c as u32]);
                }
            }
        }
    }
    let half = T::lit(0.5);
    let mut row_ptr = vec![0];
    let mut col_idx = Vec::with_capacity(ijk.len() * 8);
    let mut values = Vec::with_capacity(ijk.len() * 8);
    let mut row: Vec<(u32, T)> = Vec::with_capacity(8);
    for p in ijk {
        row.clear();
        let (px, nx) = parents(p[0]);
        let (py, ny) = parents(p[1]);
        let (pz, nz) = parents(p[2]);
        let wx = if nx == 1 { T::one() } else { half };
        let wy = if ny == 1 { T::one() } else { half };
        let wz = if nz == 1 { T::one() } else { half };
        for &a in &px[..nx] {
            for &b in &py[..ny] {
                for &c in &pz[..nz] {
                    row.push((id[index([a, b, c])], wx * wy * wz));
                }
            }
        }
        row.sort_by_key(|e| e.0);
        for &(c, w) in &row {
            col_idx.push(c);
            values.push(w);
        }
        row_ptr.push(values.len());
    }
    (CsrMatrix::from_raw(ijk.len(), coarse.len(), row_ptr, col_idx, values), coarse)
}

fn inverse_diagonal<T: Real>(a: &CsrMatrix<T>) -> Vec<T> {
    a.diagonal().iter().map(|&d| if d > T::zero() { T::one() / d } else { T::zero() }).collect()
}

impl<T: Real> GeometricMultigrid<T> {
    /// `vertex_ijk[i]` is the lattice position of unknown `i`.
    pub fn new(a: CsrMatrix<T>, vertex_ijk: &[[u32; 3]], opts: MultigridOptions) -> Result<Self, SolveError> {
        assert_eq!(a.nrows(), vertex_ijk.len());
        let mut levels = Vec::new();
        let mut current = a;
        let mut ijk = vertex_ijk.to_vec();
        while current.nrows() > opts.coarse_size && levels.len() + 1 < opts.max_levels {
            let (p, coarse_ijk) = interpolation::<T>(&ijk);
            if coarse_ijk.len() >= ijk.len() {
                break;
            }
            let pt = p.transpose();
            let coarse = pt.matmul(&current.matmul(&p));
            let inv_diag = inverse_diagonal(&current);
            levels.push(Level { a: current, inv_diag, p, pt });
            current = coarse;
            ijk = coarse_ijk;
        }
        let n = current.nrows();
        let mut dense = vec![T::zero(); n * n];
        let mean_diag = current.diagonal().iter().copied().sum::<T>() / T::from_usize_lossy(n.max(1));
        // rank-one shift on the constant direction makes the singular
        // Neumann operator invertible without changing its action on
        // mean-free vectors
        let shift = mean_diag / T::from_usize_lossy(n.max(1));
        for r in 0..n {
            let (cols, vals) = current.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                dense[r * n + c as usize] = v;
            }
            for c in 0..n {
                dense[r * n + c] += shift;
            }
        }
        let coarse = Cholesky::new(n, &dense, T::lit(1e-10))
            .map_err(|p| SolveError::Indefinite(format!("coarse operator has negative pivot {:e}", p.value)))?;
        Ok(Self { levels, coarse_a: current, coarse, smoothing_steps: opts.smoothing_steps, scratch: ScratchPool::new() })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len() + 1
    }

    /// Unknowns per level, finest first.
    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.a.nrows()).chain(std::iter::once(self.coarse_a.nrows())).collect()
    }

    /// Unknowns on the finest level.
    pub fn size(&self) -> usize {
        self.levels.first().map_or(self.coarse_a.nrows(), |l| l.a.nrows())
    }

    /// One V-cycle on `k` interleaved right-hand sides, zero initial guess.
    fn vcycle(&self, level: usize, k: usize, b: &[T], x: &mut [T]) {
        if level == self.levels.len() {
            self.coarse_solve(k, b, x);
            return;
        }
        let lv = &self.levels[level];
        let n = lv.a.nrows();
        x.iter_mut().for_each(|v| *v = T::zero());
        let smooth = |x: &mut [T], forward: bool| gauss_seidel_multi(&lv.a, k, b, x, &lv.inv_diag, forward);
        for _ in 0..self.smoothing_steps {
            smooth(x, true);
        }
        let mut r = self.scratch.take(n * k);
        lv.a.matmul_interleaved(k, x, &mut r);
        for (ri, &bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let nc = lv.p.ncols();
        let mut rc = self.scratch.take(nc * k);
        lv.pt.matmul_interleaved(k, &r, &mut rc);
        let mut xc = self.scratch.take(nc * k);
        self.vcycle(level + 1, k, &rc, &mut xc);
        lv.p.matmul_interleaved(k, &xc, &mut r);
        for (xi, &ci) in x.iter_mut().zip(&r) {
            *xi += ci;
        }
        self.scratch.put(xc);
        self.scratch.put(rc);
        self.scratch.put(r);
        for _ in 0..self.smoothing_steps {
            smooth(x, false);
        }
    }

    fn coarse_solve(&self, k: usize, b: &[T], x: &mut [T]) {
        if k == 1 {
            x.copy_from_slice(b);
            self.coarse.solve_in_place(x);
            return;
        }
        let n = b.len() / k;
        let mut col = vec![T::zero(); n];
        for j in 0..k {
            for i in 0..n {
                col[i] = b[i * k + j];
            }
            self.coarse.solve_in_place(&mut col);
            for i in 0..n {
                x[i * k + j] = col[i];
            }
        }
    }
}

impl<T: Real> Preconditioner<T> for GeometricMultigrid<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        self.vcycle(0, 1, r, z);
    }

    fn apply_multi(&self, k: usize, r: &[T], z: &mut [T]) {
        self.vcycle(0, k, r, z);
    }
}

/// Local map from the 8 vertex values of a trilinear function to its
/// modal coefficients in the orthonormal DG basis.
pub fn continuous_to_modal<T: Real>() -> [[T; 8]; 8] {
    let rule = quadrature_rule::<T>(QuadratureEntity::Cell, 3).expect("supported degree");
    let dg = BasisSet::<T>::dg_orthonormal();
    let cg = BasisSet::<T>::cg_trilinear();
    let mut m = [[T::zero(); 8]; 8];
    for (p, w) in rule.iter() {
        let (a, b) = (dg.values(p), cg.values(p));
        for i in 0..8 {
            for v in 0..8 {
                m[i][v] += w * a[i] * b[v];
            }
        }
    }
    m
}

/// Two-level preconditioner for the SWIP operator: block Gauss-Seidel on
/// the cell blocks, and a correction in the continuous trilinear subspace
/// solved approximately by one multigrid V-cycle.
pub struct DgTwoLevel<T> {
    a: CsrMatrix<T>,
    blocks: BlockJacobi<T>,
    cells: Vec<[u32; 8]>,
    embed: [[T; 8]; 8],
    coarse: GeometricMultigrid<T>,
    smoothing_steps: usize,
    scratch: ScratchPool<T>,
}

impl<T: Real> DgTwoLevel<T> {
    /// `cg_operator` must be the restriction `Pᵀ A P` of `a` to the
    /// continuous subspace, which for the SWIP form is the CG stiffness
    /// matrix with the same conductivities.
    pub fn new(
        a: CsrMatrix<T>,
        cells: Vec<[u32; 8]>,
        cg_operator: CsrMatrix<T>,
        vertex_ijk: &[[u32; 3]],
        opts: MultigridOptions,
    ) -> Result<Self, SolveError> {
        let blocks = BlockJacobi::new(&a, 8)?;
        let coarse = GeometricMultigrid::new(cg_operator, vertex_ijk, opts)?;
        Ok(Self {
            a,
            blocks,
            cells,
            embed: continuous_to_modal(),
            coarse,
            smoothing_steps: opts.smoothing_steps,
            scratch: ScratchPool::new(),
        })
    }

    pub fn coarse(&self) -> &GeometricMultigrid<T> {
        &self.coarse
    }

    /// `y = P u` (vertex values to modal coefficients).
    pub fn prolongate(&self, u: &[T], y: &mut [T]) {
        self.prolongate_multi(1, u, y);
    }

    /// `u = Pᵀ y`.
    pub fn restrict(&self, y: &[T], u: &mut [T]) {
        self.restrict_multi(1, y, u);
    }

    fn prolongate_multi(&self, k: usize, u: &[T], y: &mut [T]) {
        for (c, verts) in self.cells.iter().enumerate() {
            let yc = &mut y[8 * c * k..8 * (c + 1) * k];
            yc.iter_mut().for_each(|v| *v = T::zero());
            for (v, &gv) in verts.iter().enumerate() {
                let uv = &u[gv as usize * k..(gv as usize + 1) * k];
                for i in 0..8 {
                    let e = self.embed[i][v];
                    if e != T::zero() {
                        for (a, &b) in yc[i * k..(i + 1) * k].iter_mut().zip(uv) {
                            *a += e * b;
                        }
                    }
                }
            }
        }
    }

    fn restrict_multi(&self, k: usize, y: &[T], u: &mut [T]) {
        u.iter_mut().for_each(|v| *v = T::zero());
        for (c, verts) in self.cells.iter().enumerate() {
            let yc = &y[8 * c * k..8 * (c + 1) * k];
            for (v, &gv) in verts.iter().enumerate() {
                let uv = &mut u[gv as usize * k..(gv as usize + 1) * k];
                for i in 0..8 {
                    let e = self.embed[i][v];
                    if e != T::zero() {
                        for (a, &b) in uv.iter_mut().zip(&yc[i * k..(i + 1) * k]) {
                            *a += e * b;
                        }
                    }
                }
            }
        }
    }

    fn apply_k(&self, k: usize, r: &[T], z: &mut [T]) {
        let smooth = |z: &mut [T], forward: bool| {
            if self.blocks.block_size() == 8 {
                block_gauss_seidel_multi(&self.a, &self.blocks, k, r, z, forward);
            } else {
                assert_eq!(k, 1, "interleaved block sweeps assume 8×8 blocks");
                block_gauss_seidel(&self.a, &self.blocks, r, z, forward);
            }
        };
        z.iter_mut().for_each(|v| *v = T::zero());
        for _ in 0..self.smoothing_steps {
            smooth(z, true);
        }
        let mut res = self.scratch.take(z.len());
        self.a.matmul_interleaved(k, z, &mut res);
        for (ri, &bi) in res.iter_mut().zip(r) {
            *ri = bi - *ri;
        }
        let nv = self.coarse.size();
        let mut rc = self.scratch.take(nv * k);
        self.restrict_multi(k, &res, &mut rc);
        let mut xc = self.scratch.take(nv * k);
        self.coarse.vcycle(0, k, &rc, &mut xc);
        self.prolongate_multi(k, &xc, &mut res);
        for (zi, &ci) in z.iter_mut().zip(&res) {
            *zi += ci;
        }
        self.scratch.put(xc);
        self.scratch.put(rc);
        self.scratch.put(res);
        for _ in 0..self.smoothing_steps {
            smooth(z, false);
        }
    }
}

impl<T: Real> Preconditioner<T> for DgTwoLevel<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        self.apply_k(1, r, z);
    }

    fn apply_multi(&self, k: usize, r: &[T], z: &mut [T]) {
        self.apply_k(k, r, z);
    }
}
