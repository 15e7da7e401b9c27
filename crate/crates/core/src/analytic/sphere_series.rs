use std::f64::consts::PI;

use super::{AnalyticError, Dipole};
use crate::real::{v3, Real};

/// Concentric spheres centered at the origin, innermost first.
#[derive(Clone, Debug, PartialEq)]
pub struct LayeredSphereModel<T> {
    /// Outer radius of each layer (mm), strictly increasing.
    pub radii: Vec<T>,
    /// Conductivity of each layer (S/m).
    pub conductivities: Vec<T>,
    /// Number of Legendre orders summed.
    pub max_order: usize,
    /// Admissible relative tail estimate after `max_order` terms.
    pub tolerance: T,
}

/// Per-order coefficients: `alpha[k]` and `beta[k]` with
/// `u_k(r) ∝ beta[k] r^{-(l+1)} (1 + alpha[k] (r/R_k)^{2l+1})`.
struct OrderCoefficients<T> {
    alpha: Vec<T>,
    beta: Vec<T>,
}

impl<T: Real> LayeredSphereModel<T> {
    pub fn new(radii: Vec<T>, conductivities: Vec<T>) -> Result<Self, AnalyticError> {
        let m = Self { radii, conductivities, max_order: 100, tolerance: T::lit(1e-10) };
        m.validate()?;
        Ok(m)
    }

    pub fn with_max_order(mut self, n: usize) -> Self {
        self.max_order = n;
        self
    }

    pub fn with_tolerance(mut self, tol: T) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn validate(&self) -> Result<(), AnalyticError> {
        let bad = |s: &str| Err(AnalyticError::InvalidModel(s.to_string()));
        if self.radii.is_empty() || self.radii.len() != self.conductivities.len() {
            return bad("radii and conductivities must be non-empty and equally long");
        }
        if self.radii[0] <= T::zero() || self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return bad("radii must be positive and strictly increasing");
        }
        if self.conductivities.iter().any(|&s| s <= T::zero() || !s.is_finite()) {
            return bad("conductivities must be positive");
        }
        if self.max_order == 0 {
            return bad("max_order must be at least 1");
        }
        Ok(())
    }

    fn coefficients(&self, l: usize) -> OrderCoefficients<T> {
        let k = self.radii.len();
        let lf = T::from_usize_lossy(l);
        let one = T::one();
        let mut alpha = vec![T::zero(); k];
        let mut a_next = vec![T::zero(); k];
        alpha[k - 1] = (lf + one) / lf;
        for i in (0..k - 1).rev() {
            let ratio = self.radii[i] / self.radii[i + 1];
            let a = alpha[i + 1] * ratio.powi(2 * l as i32 + 1);
            a_next[i + 1] = a;
            let d = self.conductivities[i + 1] * (-(lf + one) + lf * a);
            let e = self.conductivities[i] * (one + a);
            alpha[i] = ((lf + one) * e + d) / (lf * e - d);
        }
        let mut beta = vec![one; k];
        for i in 0..k - 1 {
            beta[i + 1] = beta[i] * (one + alpha[i]) / (one + a_next[i + 1]);
        }
        OrderCoefficients { alpha, beta }
    }
}

/// Raw series potential at each point (no gauge applied).
///
/// Points must lie farther from the center than the dipole. Points beyond
/// the outermost radius receive the analytic continuation of the outer layer.
pub fn layered_sphere_potential<T: Real>(
    model: &LayeredSphereModel<T>,
    dipole: &Dipole<T>,
    points: &[[T; 3]],
) -> Result<Vec<T>, AnalyticError> {
    model.validate()?;
    let r0 = v3::norm(dipole.position);
    if r0 >= model.radii[0] {
        return Err(AnalyticError::DipoleOutsideInnerLayer {
            dipole_radius: r0.as_f64(),
            inner_radius: model.radii[0].as_f64(),
        });
    }
    let n = model.max_order;
    let coeffs: Vec<OrderCoefficients<T>> = (1..=n).map(|l| model.coefficients(l)).collect();
    let nlayers = model.radii.len();
    let prefactor = T::one() / (T::lit(4.0 * PI) * model.conductivities[0]);
    let p = dipole.moment;
    let pnorm = v3::norm(p);
    let y_hat = if r0 > T::zero() { v3::scale(dipole.position, T::one() / r0) } else { [T::zero(); 3] };

    let mut out = Vec::with_capacity(points.len());
    for &x in points {
        let r = v3::norm(x);
        if r <= r0 {
            return Err(AnalyticError::PointInsideSourceRadius {
                point_radius: r.as_f64(),
                dipole_radius: r0.as_f64(),
            });
        }
        let x_hat = v3::scale(x, T::one() / r);
        let px = v3::dot(p, x_hat);
        if r0 == T::zero() {
            // only the l = 1 order survives
            let m = layer_of(&model.radii, r).min(nlayers - 1);
            let c = &coeffs[0];
            let rr = r / model.radii[m];
            let radial = c.beta[m] * (T::one() + c.alpha[m] * rr * rr * rr);
            out.push(prefactor * radial * px / (r * r));
            continue;
        }
        let m = layer_of(&model.radii, r).min(nlayers - 1);
        let t = v3::dot(x_hat, y_hat).max(-T::one()).min(T::one());
        let py = v3::dot(p, y_hat);
        let q_in = r0 / r;
        let rr = r / model.radii[m];
        let rr2 = rr * rr;

        // Legendre P_{l-1}, P_l and derivatives
        let (mut p_prev, mut p_cur) = (T::one(), t);
        let (mut dp_prev, mut dp_cur) = (T::zero(), T::one());
        let mut pow_in = T::one(); // (r0/r)^{l-1}
        let mut pow_out = rr * rr2; // (r/R_m)^{2l+1}
        let mut sum = T::zero();
        let mut last_env = T::zero();
        let mut first_env = T::zero();
        for l in 1..=n {
            let lf = T::from_usize_lossy(l);
            let c = &coeffs[l - 1];
            let radial = c.beta[m] * (T::one() + c.alpha[m] * pow_out);
            let angular = (lf * p_cur - t * dp_cur) * py + dp_cur * px;
            let scale = pow_in / (r * r);
            sum += scale * radial * angular;
            let env = scale * radial.abs() * (lf + lf * (lf + T::one())) * pnorm;
            if l == 1 {
                first_env = env;
            }
            last_env = env;
            // advance
            let two_l1 = T::from_usize_lossy(2 * l + 1);
            let p_next = (two_l1 * t * p_cur - lf * p_prev) / (lf + T::one());
            let dp_next = dp_prev + two_l1 * p_cur;
            p_prev = p_cur;
            p_cur = p_next;
            dp_prev = dp_cur;
            dp_cur = dp_next;
            pow_in *= q_in;
            pow_out *= rr2;
        }
        let nf = T::from_usize_lossy(n);
        let growth = ((nf + T::one()) / nf).powi(2);
        let q = q_in * rr2.max(T::one()) * growth;
        let tail = if q >= T::one() { T::infinity() } else { last_env * q / (T::one() - q) };
        if tail > model.tolerance * first_env {
            return Err(AnalyticError::NotConverged {
                order: n,
                tail: (tail / first_env).as_f64(),
            });
        }
        out.push(prefactor * sum);
    }
    Ok(out)
}

/// Series potential at `points`, shifted to zero mean over the point set.
pub fn layered_sphere_reference<T: Real>(
    model: &LayeredSphereModel<T>,
    dipole: &Dipole<T>,
    points: &[[T; 3]],
) -> Result<Vec<T>, AnalyticError> {
    let mut u = layered_sphere_potential(model, dipole, points)?;
    if !u.is_empty() {
        let mean = u.iter().copied().sum::<T>() / T::from_usize_lossy(u.len());
        u.iter_mut().for_each(|v| *v -= mean);
    }
    Ok(u)
}

fn layer_of<T: Real>(radii: &[T], r: T) -> usize {
    radii.iter().position(|&rk| r <= rk).unwrap_or(radii.len())
}
