use crate::analytic::{dipole_flux_through_polygon, grad_u_inf, Dipole};
use crate::femcore::{quadrature_rule, BasisSet, QuadratureEntity, BASIS_SIZE};
use crate::hexmesh::{face_to_reference, BoundaryFace, HexMesh};
use crate::real::v3;
use crate::Real;

use super::{boundary_face_polygon, ConductivityField, RhsOptions, SchemeError, SubtractionSplit};

/// Basis tabulated at the source-term quadrature points.
pub(crate) struct SourceTables<T> {
    pub cell_points: Vec<[T; 3]>,
    pub cell_weights: Vec<T>,
    pub cell_grads: Vec<[[T; 3]; BASIS_SIZE]>,
    /// Per local face: reference points, weights, basis values.
    pub face_points: [Vec<[T; 3]>; 6],
    pub face_weights: Vec<T>,
    pub face_values: [Vec<[T; BASIS_SIZE]>; 6],
}

impl<T: Real> SourceTables<T> {
    pub fn new(basis: &BasisSet<T>, opts: &RhsOptions) -> Result<Self, SchemeError> {
        let cell = quadrature_rule::<T>(QuadratureEntity::Cell, opts.volume_degree)?;
        let face = quadrature_rule::<T>(QuadratureEntity::Face, opts.face_degree)?;
        let cell_grads = cell.points.iter().map(|&p| basis.eval(p).1).collect();
        let face_points: [Vec<[T; 3]>; 6] = std::array::from_fn(|f| {
            face.points.iter().map(|p| face_to_reference(f as u8, p[0], p[1])).collect()
        });
        let face_values = std::array::from_fn(|f| face_points[f].iter().map(|&p| basis.values(p)).collect());
        Ok(Self {
            cell_points: cell.points,
            cell_weights: cell.weights,
            cell_grads,
            face_points,
            face_weights: face.weights,
            face_values,
        })
    }
}

#[inline]
pub(crate) fn physical<T: Real>(origin: [T; 3], h: T, xi: [T; 3]) -> [T; 3] {
    [origin[0] + h * xi[0], origin[1] + h * xi[1], origin[2] + h * xi[2]]
}

/// `-∫_E σ^corr ∇u∞ · ∇φ_i`; zero when `σ^corr` vanishes on the cell.
pub(crate) fn volume_term<T: Real>(
    mesh: &HexMesh,
    field: &ConductivityField<T>,
    split: &SubtractionSplit<T>,
    dipole: &Dipole<T>,
    tables: &SourceTables<T>,
    cell: usize,
) -> Result<Option<[T; BASIS_SIZE]>, SchemeError> {
    let corr = split.sigma_corr(field, cell);
    if corr == T::zero() {
        return Ok(None);
    }
    let h = field.h();
    let origin = v3::from_f64(mesh.cell_origin(cell));
    let mut out = [T::zero(); BASIS_SIZE];
    for ((&xi, &w), grads) in tables.cell_points.iter().zip(&tables.cell_weights).zip(&tables.cell_grads) {
        let g = grad_u_inf(dipole, split.sigma_inf, physical(origin, h, xi))?;
        for i in 0..BASIS_SIZE {
            out[i] -= w * v3::dot(g, grads[i]);
        }
    }
    let scale = corr * h * h;
    Ok(Some(out.map(|v| v * scale)))
}

/// `-∫_F σ∞ ∂_n u∞ φ_i` over one boundary face.
pub(crate) fn boundary_term<T: Real>(
    mesh: &HexMesh,
    field: &ConductivityField<T>,
    split: &SubtractionSplit<T>,
    dipole: &Dipole<T>,
    tables: &SourceTables<T>,
    face: &BoundaryFace,
    exact_flux: bool,
) -> Result<[T; BASIS_SIZE], SchemeError> {
    let h = field.h();
    let cell = face.cell as usize;
    let origin = v3::from_f64(mesh.cell_origin(cell));
    let n = v3::from_f64(face.normal);
    let lf = face.face as usize;
    let mut flux = Vec::with_capacity(tables.face_weights.len());
    let mut quad = T::zero();
    for (&xi, &w) in tables.face_points[lf].iter().zip(&tables.face_weights) {
        let g = grad_u_inf(dipole, split.sigma_inf, physical(origin, h, xi))?;
        let f = split.sigma_inf * v3::dot(g, n);
        quad += w * f;
        flux.push(f);
    }
    let area = h * h;
    let shift = if exact_flux {
        let poly = boundary_face_polygon::<T>(mesh, face);
        dipole_flux_through_polygon(dipole, &poly) / area - quad
    } else {
        T::zero()
    };
    let mut out = [T::zero(); BASIS_SIZE];
    for ((&w, &f), vals) in tables.face_weights.iter().zip(&flux).zip(&tables.face_values[lf]) {
        for i in 0..BASIS_SIZE {
            out[i] -= w * (f + shift) * vals[i];
        }
    }
    Ok(out.map(|v| v * area))
}
