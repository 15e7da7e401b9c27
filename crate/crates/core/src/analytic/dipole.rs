use std::f64::consts::PI;

use super::AnalyticError;
use crate::real::{v3, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Orientation {
    Radial,
    Tangential,
    #[default]
    Free,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Radial => "radial",
            Self::Tangential => "tangential",
            Self::Free => "free",
        }
    }
}

/// Point current dipole at `position` (mm) with `moment`.
///
/// The moment unit is a free global scale (A·mm in the sweep tooling);
/// potentials scale linearly with it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dipole<T> {
    pub position: [T; 3],
    pub moment: [T; 3],
    pub orientation: Orientation,
}

impl<T: Real> Dipole<T> {
    pub fn new(position: [T; 3], moment: [T; 3]) -> Result<Self, AnalyticError> {
        if v3::norm(moment) == T::zero() || !v3::norm(moment).is_finite() {
            return Err(AnalyticError::ZeroMoment);
        }
        Ok(Self { position, moment, orientation: Orientation::Free })
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    /// `|y| / brain_radius`.
    pub fn eccentricity(&self, brain_radius: T) -> T {
        v3::norm(self.position) / brain_radius
    }

    /// Same dipole with the moment scaled by `s`.
    pub fn scaled(&self, s: T) -> Self {
        Self { moment: v3::scale(self.moment, s), ..*self }
    }
}

/// Potential of the dipole in an unbounded homogeneous conductor,
/// `<p, x - y> / (4 pi sigma |x - y|^3)`.
pub fn u_inf<T: Real>(d: &Dipole<T>, sigma_inf: T, x: [T; 3]) -> Result<T, AnalyticError> {
    let r = v3::sub(x, d.position);
    let r2 = v3::dot(r, r);
    if r2 == T::zero() {
        return Err(AnalyticError::Singular);
    }
    let r3 = r2 * r2.sqrt();
    Ok(v3::dot(d.moment, r) / (T::lit(4.0 * PI) * sigma_inf * r3))
}

/// Gradient of [`u_inf`] with respect to `x`.
pub fn grad_u_inf<T: Real>(d: &Dipole<T>, sigma_inf: T, x: [T; 3]) -> Result<[T; 3], AnalyticError> {
    let r = v3::sub(x, d.position);
    let r2 = v3::dot(r, r);
    if r2 == T::zero() {
        return Err(AnalyticError::Singular);
    }
    let inv_r = T::one() / r2.sqrt();
    let inv_r3 = inv_r * inv_r * inv_r;
    let pr = v3::dot(d.moment, r) * inv_r * inv_r;
    let c = T::one() / (T::lit(4.0 * PI) * sigma_inf);
    let three = T::lit(3.0);
    Ok([
        c * inv_r3 * (d.moment[0] - three * pr * r[0]),
        c * inv_r3 * (d.moment[1] - three * pr * r[1]),
        c * inv_r3 * (d.moment[2] - three * pr * r[2]),
    ])
}

/// Exact current `∫_S sigma_inf ∇u_inf · n ds` through a planar polygon.
///
/// The normal follows the right-hand rule of the vertex order. The value is
/// `-(p · ∇_y Ω) / 4π`, with the solid-angle gradient evaluated edge by edge
/// in closed form, and does not depend on `sigma_inf`. Summed over a closed
/// surface enclosing the dipole it vanishes identically.
pub fn dipole_flux_through_polygon<T: Real>(d: &Dipole<T>, vertices: &[[T; 3]]) -> T {
    let y = d.position;
    let mut g = [T::zero(); 3];
    for n in 0..vertices.len() {
        let a = v3::sub(vertices[n], y);
        let b = v3::sub(vertices[(n + 1) % vertices.len()], y);
        let edge = v3::sub(b, a);
        let len = v3::norm(edge);
        if len == T::zero() {
            continue;
        }
        let t = v3::scale(edge, T::one() / len);
        let axt = v3::cross(a, t);
        let rho2 = v3::dot(axt, axt);
        if rho2 == T::zero() {
            continue;
        }
        let (na, nb) = (v3::norm(a), v3::norm(b));
        let w = (v3::dot(b, t) / nb - v3::dot(a, t) / na) / rho2;
        g = v3::add(g, v3::scale(axt, w));
    }
    // g = ∮ dl × (y - x) / |y - x|^3 = ∇_y Ω
    -v3::dot(d.moment, g) / T::lit(4.0 * PI)
}
