//! Assembly of the CG and SWIP-DG subtraction discretizations.

mod cg;
mod dg;
mod field;
pub mod jump;
mod reference;
mod source;
mod system;

pub use cg::{assemble_operator_cg, assemble_rhs_cg};
pub use dg::{assemble_operator_dg, assemble_rhs_dg, DgParameters, PenaltyScaling};
pub use field::{source_conductivity, ConductivityField, SubtractionSplit};
pub use reference::{ReferenceBlocks, FaceBlocks};
pub use system::{boundary_face_polygon, AssembledRhs, AssemblyWarning, DofLayout, LinearSystem, RhsOptions, Scheme};

use thiserror::Error;

use crate::analytic::AnalyticError;
use crate::femcore::FemError;
use crate::hexmesh::MeshError;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("source position is not inside the mesh: {0}")]
    SourceOutsideMesh(#[source] MeshError),
    #[error("cell label {0} has no conductivity")]
    UnknownLabel(u8),
    #[error("penalty parameter must be non-negative and finite, got {0}")]
    InvalidPenalty(f64),
    #[error("dipole evaluation failed at a quadrature point: {0}")]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Quadrature(#[from] FemError),
    #[error("layout mismatch: {0}")]
    Layout(String),
}
