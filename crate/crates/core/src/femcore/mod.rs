//! Reference-cube machinery: Gauss-Legendre tensor rules and the two
//! trilinear bases (nodal for CG, cellwise orthonormal for DG).

mod basis;
mod quadrature;

pub use basis::{orthonormalize_broken_basis, BasisKind, BasisSet, BASIS_SIZE};
pub use quadrature::{gauss_legendre, quadrature_rule, QuadratureEntity, QuadratureRule, MAX_DEGREE};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FemError {
    #[error("quadrature degree {0} unsupported (1..={max})", max = MAX_DEGREE)]
    UnsupportedDegree(usize),
}
