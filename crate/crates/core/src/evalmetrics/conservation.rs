use super::{EvalError, ForwardSolution};
use crate::analytic::{dipole_flux_through_polygon, grad_u_inf};
use crate::femcore::{quadrature_rule, QuadratureEntity};
use crate::hexmesh::{face_to_reference, Skeleton};
use crate::real::v3;
use crate::schemes::{boundary_face_polygon, DgParameters, RhsOptions, Scheme};
use crate::Real;

/// Per-cell balance of the discrete current.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationReport {
    /// `|Σ_faces ∫ j·n|` per cell.
    pub residuals: Vec<f64>,
    /// `Σ_faces |∫ j·n|` per cell, the scale the residual is compared with.
    pub flux_magnitudes: Vec<f64>,
}

impl ConservationReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_flux(&self) -> f64 {
        self.flux_magnitudes.iter().copied().fold(0.0, f64::max)
    }
}

/// Rebuilds the numerical flux of the SWIP solution on every face,
/// `⟨σ∇u^corr_h⟩_ω·n − η σ̂/h_γ [u^corr_h] + ⟨σ^corr ∇u∞⟩_ω·n` on internal
/// faces and the imposed `−σ∞ ∂_n u∞` on the boundary, and sums it over the
/// faces of each cell. The sum vanishes up to the solver residual.
///
/// `params` and `rhs` must be the ones used for assembly.
pub fn check_conservation<T: Real>(
    sol: &ForwardSolution<'_, T>,
    skeleton: &Skeleton,
    params: &DgParameters<T>,
    rhs: &RhsOptions,
) -> Result<ConservationReport, EvalError> {
    if sol.scheme != Scheme::Dg {
        return Err(EvalError::UnsupportedScheme);
    }
    let mesh = sol.mesh;
    let field = sol.field;
    let split = &sol.split;
    let rule = quadrature_rule::<T>(QuadratureEntity::Face, rhs.face_degree.max(3))
        .map_err(|e| EvalError::Invalid(e.to_string()))?;
    let h = field.h();
    let area = h * h;
    let penalty = params.effective_penalty();
    let mut balance = vec![T::zero(); mesh.num_cells()];
    let mut magnitude = vec![T::zero(); mesh.num_cells()];
    for face in skeleton.internal_faces() {
        let (e, f) = (face.cell_e as usize, face.cell_f as usize);
        let n = v3::from_f64(face.normal);
        let origin: [T; 3] = v3::from_f64(mesh.cell_origin(e));
        let (we, wf) = field.weights(e, f);
        let (ae, af) = (we * field.sigma(e), wf * field.sigma(f));
        let src = we * split.sigma_corr(field, e) + wf * split.sigma_corr(field, f);
        let pen = penalty * field.harmonic(e, f) / field.face_width();
        let mut total = T::zero();
        for (p, w) in rule.iter() {
            let xi = face_to_reference(face.face_e, p[0], p[1]);
            let x = [origin[0] + h * xi[0], origin[1] + h * xi[1], origin[2] + h * xi[2]];
            let xf = mesh.to_reference(f, v3::to_f64(x)).map(T::lit);
            let (ue, ge) = sol.correction_at(e, xi);
            let (uf, gf) = sol.correction_at(f, xf);
            let mut flux = ae * v3::dot(ge, n) + af * v3::dot(gf, n) - pen * (ue - uf);
            if src != T::zero() {
                flux += src * v3::dot(grad_u_inf(&sol.dipole, split.sigma_inf, x)?, n);
            }
            total += w * flux;
        }
        let total = total * area;
        balance[e] += total;
        balance[f] -= total;
        magnitude[e] += total.abs();
        magnitude[f] += total.abs();
    }
    for face in skeleton.boundary_faces() {
        let c = face.cell as usize;
        let outflow = if rhs.exact_boundary_flux {
            dipole_flux_through_polygon(&sol.dipole, &boundary_face_polygon::<T>(mesh, face))
        } else {
            let origin: [T; 3] = v3::from_f64(mesh.cell_origin(c));
            let n = v3::from_f64(face.normal);
            let mut q = T::zero();
            for (p, w) in rule.iter() {
                let xi = face_to_reference(face.face, p[0], p[1]);
                let x = [origin[0] + h * xi[0], origin[1] + h * xi[1], origin[2] + h * xi[2]];
                q += w * split.sigma_inf * v3::dot(grad_u_inf(&sol.dipole, split.sigma_inf, x)?, n);
            }
            q * area
        };
        // the correction current through the boundary cancels the primary one
        balance[c] -= outflow;
        magnitude[c] += outflow.abs();
    }
    Ok(ConservationReport {
        residuals: balance.iter().map(|v| v.abs().as_f64()).collect(),
        flux_magnitudes: magnitude.iter().map(|v| v.as_f64()).collect(),
    })
}
