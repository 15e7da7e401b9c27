//! Closed-form dipole fields and the concentric-sphere reference solution.

mod dipole;
mod sphere_series;

pub use dipole::{dipole_flux_through_polygon, grad_u_inf, u_inf, Dipole, Orientation};
pub use sphere_series::{layered_sphere_potential, layered_sphere_reference, LayeredSphereModel};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("evaluation point coincides with the dipole position")]
    Singular,
    #[error("dipole moment must be non-zero")]
    ZeroMoment,
    #[error("invalid sphere model: {0}")]
    InvalidModel(String),
    #[error("point at radius {point_radius} mm is not outside the dipole radius {dipole_radius} mm")]
    PointInsideSourceRadius { point_radius: f64, dipole_radius: f64 },
    #[error("dipole at radius {dipole_radius} mm is not inside the innermost layer ({inner_radius} mm)")]
    DipoleOutsideInnerLayer { dipole_radius: f64, inner_radius: f64 },
    #[error("series not converged at order {order}: tail estimate {tail:e} exceeds tolerance")]
    NotConverged { order: usize, tail: f64 },
}
