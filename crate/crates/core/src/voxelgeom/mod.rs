//! Voxel segmentations: label grids, compartment tables, sphere phantoms,
//! skull-leak auditing and the `SEGv1` file format.

mod compartments;
mod grid;
mod leaks;
mod segio;
mod sphere;

pub use compartments::{Compartment, CompartmentTable, TissueRoles};
pub use grid::LabelGrid;
pub use leaks::{detect_leaks, LeakReport};
pub use segio::{read_segmentation, write_segmentation, LabelEncoding};
pub use sphere::{generate_sphere_segmentation, SegmentationWarning, SphereSegmentation};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VoxelError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid compartment table: {0}")]
    InvalidTable(String),
    #[error("compartment table has no {0} role assigned")]
    MissingRole(&'static str),
    #[error("malformed SEGv1 data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
