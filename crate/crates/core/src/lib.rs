//! Finite-element EEG forward modeling on voxel-derived hexahedral meshes
//! with the subtraction source model, in continuous and discontinuous
//! Galerkin form.

pub mod analytic;
pub mod evalmetrics;
pub mod femcore;
pub mod hexmesh;
pub mod pipeline;
pub mod real;
pub mod schemes;
pub mod solve;
pub mod sparse;
pub mod voxelgeom;

pub use real::Real;

/// Double-precision dipole.
pub type Dipole = analytic::Dipole<f64>;
/// Double-precision layered sphere model.
pub type LayeredSphereModel = analytic::LayeredSphereModel<f64>;
/// Double-precision CSR matrix.
pub type CsrMatrix = sparse::CsrMatrix<f64>;
/// Double-precision per-cell conductivity.
pub type ConductivityField = schemes::ConductivityField<f64>;
/// Double-precision DG parameters.
pub type DgParameters = schemes::DgParameters<f64>;
/// Double-precision assembled system.
pub type LinearSystem = schemes::LinearSystem<f64>;
/// Double-precision prepared solver.
pub type Solver = solve::Solver<f64>;
/// Double-precision transfer matrix.
pub type TransferMatrix = solve::TransferMatrix<f64>;
/// Double-precision forward solution.
pub type ForwardSolution<'a> = evalmetrics::ForwardSolution<'a, f64>;
/// Double-precision cell flux field.
pub type FluxField = evalmetrics::FluxField<f64>;
