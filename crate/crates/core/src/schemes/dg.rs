use crate::analytic::{grad_u_inf, Dipole};
use crate::femcore::{BasisSet, BASIS_SIZE};
use crate::hexmesh::{FaceRef, HexMesh, Skeleton};
use crate::real::v3;
use crate::sparse::CsrMatrix;
use crate::Real;

use super::cg::warnings;
use super::source::{boundary_term, physical, volume_term, SourceTables};
use super::{AssembledRhs, ConductivityField, ReferenceBlocks, RhsOptions, SchemeError, SubtractionSplit};

/// How the penalty parameter is scaled by the polynomial degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PenaltyScaling {
    /// `η k (k + d - 1) σ̂/h_γ` with `k = 1`, `d = 3`, the customary
    /// trace-inequality scaling of interior penalty methods.
    #[default]
    Degree,
    /// `η σ̂/h_γ` without degree factor.
    Unit,
}

impl PenaltyScaling {
    pub fn factor(self) -> f64 {
        match self {
            PenaltyScaling::Degree => 3.0,
            PenaltyScaling::Unit => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DgParameters<T> {
    pub eta: T,
    pub penalty_scaling: PenaltyScaling,
}

impl<T: Real> Default for DgParameters<T> {
    fn default() -> Self {
        Self { eta: T::lit(0.39), penalty_scaling: PenaltyScaling::Degree }
    }
}

impl<T: Real> DgParameters<T> {
    pub fn with_eta(eta: T) -> Self {
        Self { eta, ..Self::default() }
    }

    /// Effective multiplier of `σ̂/h_γ [u][v]`.
    pub fn effective_penalty(&self) -> T {
        self.eta * T::lit(self.penalty_scaling.factor())
    }
}

type Block<T> = [[T; BASIS_SIZE]; BASIS_SIZE];

/// Neighbor of `cell` across an internal face and the local face index on
/// `cell`'s side.
#[inline]
fn internal_view(skeleton: &Skeleton, idx: u32, cell: usize) -> (usize, u8) {
    let f = &skeleton.internal_faces()[idx as usize];
    if f.cell_e as usize == cell {
        (f.cell_f as usize, f.face_e)
    } else {
        (f.cell_e as usize, f.face_f)
    }
}

/// SWIP operator `a + J` in the cellwise orthonormal basis.
///
/// Faces on the domain boundary contribute neither consistency nor penalty
/// terms.
pub fn assemble_operator_dg<T: Real>(
    mesh: &HexMesh,
    skeleton: &Skeleton,
    field: &ConductivityField<T>,
    params: &DgParameters<T>,
) -> Result<CsrMatrix<T>, SchemeError> {
    if !(params.eta >= T::zero() && params.eta.is_finite()) {
        return Err(SchemeError::InvalidPenalty(params.eta.as_f64()));
    }
    let reference = ReferenceBlocks::new(BasisSet::dg_orthonormal(), 3)?;
    let n = mesh.num_cells();
    let h = field.h();
    let penalty = params.effective_penalty();
    let zero: Block<T> = [[T::zero(); BASIS_SIZE]; BASIS_SIZE];

    let mut row_ptr = Vec::with_capacity(8 * n + 1);
    let mut col_idx: Vec<u32> = Vec::with_capacity(8 * n * 16);
    let mut values: Vec<T> = Vec::with_capacity(8 * n * 16);
    row_ptr.push(0);
    let mut blocks: Vec<(usize, Block<T>)> = Vec::with_capacity(7);
    for e in 0..n {
        blocks.clear();
        let se = field.sigma(e);
        let mut diag = zero;
        for i in 0..BASIS_SIZE {
            for j in 0..BASIS_SIZE {
                diag[i][j] = se * h * reference.stiffness[i][j];
            }
        }
        for fr in skeleton.cell_faces(e) {
            let FaceRef::Internal(idx) = *fr else { continue };
            let (nb, local) = internal_view(skeleton, idx, e);
            let fb = &reference.faces[local as usize];
            let (w0, w1) = field.weights(e, nb);
            let a0 = w0 * se;
            let a1 = w1 * field.sigma(nb);
            let pen = penalty * field.harmonic(e, nb) / field.face_width() * h * h;
            let mut off = zero;
            for i in 0..BASIS_SIZE {
                for j in 0..BASIS_SIZE {
                    diag[i][j] += h * (-a0 * fb.trace_flux[0][0][i][j] - a0 * fb.trace_flux[0][0][j][i])
                        + pen * fb.trace_trace[0][0][i][j];
                    off[i][j] = h * (-a1 * fb.trace_flux[0][1][i][j] - a0 * fb.trace_flux[1][0][j][i])
                        + pen * fb.trace_trace[0][1][i][j];
                }
            }
            blocks.push((nb, off));
        }
        blocks.push((e, diag));
        blocks.sort_by_key(|b| b.0);
        for i in 0..BASIS_SIZE {
            for (c, blk) in &blocks {
                for (j, &v) in blk[i].iter().enumerate() {
                    if v != T::zero() {
                        col_idx.push((8 * c + j) as u32);
                        values.push(v);
                    }
                }
            }
            row_ptr.push(values.len());
        }
    }
    Ok(CsrMatrix::from_raw(8 * n, 8 * n, row_ptr, col_idx, values))
}

/// `l(v) = -∫ σ^corr ∇u∞ · ∇_h v + ∫_Γint ⟨σ^corr ∇u∞⟩ · n [v] - ∫_∂Ω σ∞ ∂_n u∞ v`.
///
/// The face average uses the same conductivity weights as the operator.
pub fn assemble_rhs_dg<T: Real>(
    mesh: &HexMesh,
    skeleton: &Skeleton,
    field: &ConductivityField<T>,
    split: &SubtractionSplit<T>,
    dipole: &Dipole<T>,
    opts: &RhsOptions,
) -> Result<AssembledRhs<T>, SchemeError> {
    let tables = SourceTables::new(&BasisSet::dg_orthonormal(), opts)?;
    let mut b = vec![T::zero(); 8 * mesh.num_cells()];
    for c in 0..mesh.num_cells() {
        if let Some(local) = volume_term(mesh, field, split, dipole, &tables, c)? {
            for (i, v) in local.into_iter().enumerate() {
                b[8 * c + i] += v;
            }
        }
    }
    let h = field.h();
    let area = h * h;
    for face in skeleton.internal_faces() {
        let (e, f) = (face.cell_e as usize, face.cell_f as usize);
        let (ce, cf) = (split.sigma_corr(field, e), split.sigma_corr(field, f));
        if ce == T::zero() && cf == T::zero() {
            continue;
        }
        let (we, wf) = field.weights(e, f);
        let avg = we * ce + wf * cf;
        let n = v3::from_f64(face.normal);
        let origin = v3::from_f64(mesh.cell_origin(e));
        let (le, lf) = (face.face_e as usize, face.face_f as usize);
        let mut loc_e = [T::zero(); BASIS_SIZE];
        let mut loc_f = [T::zero(); BASIS_SIZE];
        for (q, (&xi, &w)) in tables.face_points[le].iter().zip(&tables.face_weights).enumerate() {
            let g = grad_u_inf(dipole, split.sigma_inf, physical(origin, h, xi))?;
            let flux = w * avg * v3::dot(g, n);
            for i in 0..BASIS_SIZE {
                loc_e[i] += flux * tables.face_values[le][q][i];
                loc_f[i] -= flux * tables.face_values[lf][q][i];
            }
        }
        for i in 0..BASIS_SIZE {
            b[8 * e + i] += area * loc_e[i];
            b[8 * f + i] += area * loc_f[i];
        }
    }
    for bf in skeleton.boundary_faces() {
        let local = boundary_term(mesh, field, split, dipole, &tables, bf, opts.exact_boundary_flux)?;
        let c = bf.cell as usize;
        for (i, v) in local.into_iter().enumerate() {
            b[8 * c + i] += v;
        }
    }
    Ok(AssembledRhs { values: b, warnings: warnings(split) })
}
