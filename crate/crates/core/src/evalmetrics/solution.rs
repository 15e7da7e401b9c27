use super::EvalError;
use crate::analytic::{grad_u_inf, u_inf, Dipole};
use crate::femcore::{BasisSet, BASIS_SIZE};
use crate::hexmesh::{HexMesh, Skeleton};
use crate::real::v3;
use crate::schemes::{ConductivityField, DofLayout, Scheme, SubtractionSplit};
use crate::Real;

/// Coefficients of `u^corr_h` with everything needed to rebuild
/// `u_h = u^corr_h + u∞` and the current density.
pub struct ForwardSolution<'a, T> {
    pub scheme: Scheme,
    pub coefficients: Vec<T>,
    pub mesh: &'a HexMesh,
    pub field: &'a ConductivityField<T>,
    pub split: SubtractionSplit<T>,
    pub dipole: Dipole<T>,
    basis: BasisSet<T>,
}

impl<'a, T: Real> ForwardSolution<'a, T> {
    pub fn new(
        scheme: Scheme,
        coefficients: Vec<T>,
        mesh: &'a HexMesh,
        field: &'a ConductivityField<T>,
        split: SubtractionSplit<T>,
        dipole: Dipole<T>,
    ) -> Result<Self, EvalError> {
        let layout = match scheme {
            Scheme::Cg => DofLayout::Cg { num_vertices: mesh.num_vertices() },
            Scheme::Dg => DofLayout::Dg { num_cells: mesh.num_cells() },
        };
        if coefficients.len() != layout.num_dofs() {
            return Err(EvalError::LengthMismatch {
                scheme: scheme.as_str(),
                expected: layout.num_dofs(),
                got: coefficients.len(),
            });
        }
        let basis = match scheme {
            Scheme::Cg => BasisSet::cg_trilinear(),
            Scheme::Dg => BasisSet::dg_orthonormal(),
        };
        Ok(Self { scheme, coefficients, mesh, field, split, dipole, basis })
    }

    fn local(&self, cell: usize) -> [T; BASIS_SIZE] {
        match self.scheme {
            Scheme::Cg => self.mesh.cells()[cell].map(|v| self.coefficients[v as usize]),
            Scheme::Dg => std::array::from_fn(|i| self.coefficients[BASIS_SIZE * cell + i]),
        }
    }

    /// `u^corr_h` and its physical gradient at reference point `xi` of `cell`.
    pub fn correction_at(&self, cell: usize, xi: [T; 3]) -> (T, [T; 3]) {
        let c = self.local(cell);
        let (v, g) = self.basis.eval(xi);
        let inv_h = T::one() / self.field.h();
        let mut u = T::zero();
        let mut grad = [T::zero(); 3];
        for i in 0..BASIS_SIZE {
            u += c[i] * v[i];
            for d in 0..3 {
                grad[d] += c[i] * g[i][d] * inv_h;
            }
        }
        (u, grad)
    }

    /// Full potential at a physical point inside `cell`.
    pub fn potential_in(&self, cell: usize, x: [f64; 3]) -> Result<T, EvalError> {
        let xi = self.mesh.to_reference(cell, x).map(T::lit);
        let (corr, _) = self.correction_at(cell, xi);
        Ok(corr + u_inf(&self.dipole, self.split.sigma_inf, v3::from_f64(x))?)
    }

    /// Full potential at the sampling points, mean-centered over the set.
    pub fn evaluate_potential(&self, sampling: &SurfaceSampling) -> Result<Vec<T>, EvalError> {
        if sampling.is_empty() {
            return Err(EvalError::EmptySampling);
        }
        let mut out = sampling
            .points
            .iter()
            .zip(&sampling.cells)
            .map(|(&x, &c)| self.potential_in(c, x))
            .collect::<Result<Vec<_>, _>>()?;
        super::mean_center(&mut out);
        Ok(out)
    }

    /// Current density at every cell centroid.
    pub fn flux_field(&self) -> FluxField<T> {
        let half = T::lit(0.5);
        let vectors = (0..self.mesh.num_cells())
            .map(|c| {
                let (_, g) = self.correction_at(c, [half; 3]);
                let x = v3::from_f64(self.mesh.cell_centroid(c));
                let gi = grad_u_inf(&self.dipole, self.split.sigma_inf, x).ok()?;
                Some(v3::scale(v3::add(g, gi), self.field.sigma(c)))
            })
            .collect();
        FluxField { vectors }
    }
}

/// Cellwise current density `σ (∇u^corr_h + ∇u∞)` at the centroids (mm-based
/// units). `None` where the centroid coincides with the dipole.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxField<T> {
    pub vectors: Vec<Option<[T; 3]>>,
}

impl<T: Real> FluxField<T> {
    pub fn magnitudes(&self) -> Vec<Option<T>> {
        self.vectors.iter().map(|v| v.map(v3::norm)).collect()
    }

    /// Cell of largest magnitude among `cells` (all cells when `None`).
    pub fn argmax(&self, cells: Option<&[usize]>) -> Option<(usize, T)> {
        let mut best: Option<(usize, T)> = None;
        let mut visit = |c: usize| {
            if let Some(v) = self.vectors[c] {
                let m = v3::norm(v);
                if best.is_none_or(|(_, b)| m > b) {
                    best = Some((c, m));
                }
            }
        };
        match cells {
            Some(list) => list.iter().copied().for_each(&mut visit),
            None => (0..self.vectors.len()).for_each(&mut visit),
        }
        best
    }
}

/// Evaluation points with their containing cells.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceSampling {
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<usize>,
    /// Local face index for points taken from boundary faces.
    pub faces: Vec<Option<u8>>,
}

impl SurfaceSampling {
    /// Centroids of all boundary faces of cells carrying `label` (the skin).
    pub fn boundary_faces(mesh: &HexMesh, skeleton: &Skeleton, label: u8) -> Result<Self, EvalError> {
        let mut s = Self { points: Vec::new(), cells: Vec::new(), faces: Vec::new() };
        for f in skeleton.boundary_faces() {
            let c = f.cell as usize;
            if mesh.cell_label(c) == label {
                s.points.push(mesh.face_centroid(c, f.face));
                s.cells.push(c);
                s.faces.push(Some(f.face));
            }
        }
        if s.is_empty() {
            return Err(EvalError::EmptySampling);
        }
        Ok(s)
    }

    /// Arbitrary points; each must lie in a mesh cell.
    pub fn from_points(mesh: &HexMesh, points: Vec<[f64; 3]>) -> Result<Self, EvalError> {
        let cells = points.iter().map(|&p| mesh.locate(p)).collect::<Result<Vec<_>, _>>()?;
        if points.is_empty() {
            return Err(EvalError::EmptySampling);
        }
        let faces = vec![None; points.len()];
        Ok(Self { points, cells, faces })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
