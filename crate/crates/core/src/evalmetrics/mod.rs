//! Post-processing: potential and flux reconstruction, surface sampling,
//! error metrics, conservation audit and source placement.

mod conservation;
mod metrics;
mod report;
mod sensors;
mod solution;
mod sources;

pub use conservation::{check_conservation, ConservationReport};
pub use metrics::{is_mean_centered, ln_mag, local_flux_metrics, mean_center, rdm, LocalFluxMetrics};
pub use report::{write_metrics_csv, MetricsRow, METRICS_HEADER};
pub use sensors::{point_functional, sensor_functionals};
pub use solution::{FluxField, ForwardSolution, SurfaceSampling};
pub use sources::{place_sources, PlacedSource, DEFAULT_ECCENTRICITIES};

use thiserror::Error;

use crate::analytic::AnalyticError;
use crate::hexmesh::MeshError;
use crate::schemes::SchemeError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("coefficient vector has {got} entries, the {scheme} layout needs {expected}")]
    LengthMismatch { scheme: &'static str, expected: usize, got: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("metric inputs have different lengths ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("metric input is the zero vector")]
    ZeroVector,
    #[error("metric input is not mean-centered (mean {mean:e}, rms {rms:e})")]
    NotMeanCentered { mean: f64, rms: f64 },
    #[error("no sampling points")]
    EmptySampling,
    #[error("the conservation audit needs a DG solution (CG is only globally conservative)")]
    UnsupportedScheme,
    #[error("eccentricity {0} outside [0, 1)")]
    Eccentricity(f64),
    #[error("invalid argument: {0}")]
    Invalid(String),
}
