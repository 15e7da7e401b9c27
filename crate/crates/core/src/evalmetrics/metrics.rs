use super::{EvalError, FluxField};
use crate::real::v3;
use crate::Real;

pub fn mean_center<T: Real>(v: &mut [T]) {
    if v.is_empty() {
        return;
    }
    let mean = v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len());
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Mean below `1e-9` of the root mean square (or exactly zero).
pub fn is_mean_centered<T: Real>(v: &[T]) -> bool {
    let (mean, rms) = moments(v);
    mean.abs() <= 1e-9 * rms
}

fn moments<T: Real>(v: &[T]) -> (f64, f64) {
    let n = v.len().max(1) as f64;
    let mean = v.iter().map(|x| x.as_f64()).sum::<f64>() / n;
    let rms = (v.iter().map(|x| x.as_f64().powi(2)).sum::<f64>() / n).sqrt();
    (mean, rms)
}

fn check<T: Real>(a: &[T], b: &[T]) -> Result<(f64, f64), EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::SizeMismatch(a.len(), b.len()));
    }
    let mut norms = [0.0; 2];
    for (k, v) in [a, b].into_iter().enumerate() {
        let (mean, rms) = moments(v);
        if rms == 0.0 {
            return Err(EvalError::ZeroVector);
        }
        if mean.abs() > 1e-9 * rms {
            return Err(EvalError::NotMeanCentered { mean, rms });
        }
        norms[k] = rms * (v.len() as f64).sqrt();
    }
    Ok((norms[0], norms[1]))
}

/// Relative difference measure `‖u_h/‖u_h‖ − u/‖u‖‖` in `[0, 2]`. Both inputs
/// must be mean-centered.
pub fn rdm<T: Real>(u_h: &[T], u: &[T]) -> Result<f64, EvalError> {
    let (nh, n) = check(u_h, u)?;
    let d: f64 = u_h.iter().zip(u).map(|(a, b)| (a.as_f64() / nh - b.as_f64() / n).powi(2)).sum();
    Ok(d.sqrt())
}

/// Logarithmic magnitude error `ln(‖u_h‖ / ‖u‖)`.
pub fn ln_mag<T: Real>(u_h: &[T], u: &[T]) -> Result<f64, EvalError> {
    let (nh, n) = check(u_h, u)?;
    Ok((nh / n).ln())
}

/// Cellwise comparison of two current densities.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFluxMetrics<T> {
    /// `ln(‖j_cg‖ / ‖j_dg‖)`; `None` where either flux vanishes or is
    /// undefined.
    pub ln_mag_loc: Vec<Option<T>>,
    /// `j_cg − j_dg`; `None` where either flux is undefined.
    pub tot_diff: Vec<Option<[T; 3]>>,
}

pub fn local_flux_metrics<T: Real>(j_cg: &FluxField<T>, j_dg: &FluxField<T>) -> Result<LocalFluxMetrics<T>, EvalError> {
    if j_cg.vectors.len() != j_dg.vectors.len() {
        return Err(EvalError::SizeMismatch(j_cg.vectors.len(), j_dg.vectors.len()));
    }
    let mut ln_mag_loc = Vec::with_capacity(j_cg.vectors.len());
    let mut tot_diff = Vec::with_capacity(j_cg.vectors.len());
    for (a, b) in j_cg.vectors.iter().zip(&j_dg.vectors) {
        match (a, b) {
            (Some(a), Some(b)) => {
                let (na, nb) = (v3::norm(*a), v3::norm(*b));
                ln_mag_loc.push((na > T::zero() && nb > T::zero()).then(|| (na / nb).ln()));
                tot_diff.push(Some(v3::sub(*a, *b)));
            }
            _ => {
                ln_mag_loc.push(None);
                tot_diff.push(None);
            }
        }
    }
    Ok(LocalFluxMetrics { ln_mag_loc, tot_diff })
}
