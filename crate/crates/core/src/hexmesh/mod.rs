//! Structured hexahedral meshes built from label grids, their face skeleton,
//! and legacy VTK export.

mod mesh;
mod skeleton;
pub mod vtk;

pub use mesh::{build_hex_mesh, HexMesh, LOCAL_VERTEX_OFFSETS};
pub use skeleton::{compute_skeleton, BoundaryFace, FaceRef, InternalFace, Skeleton};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh resolution {h} mm does not refine segmentation spacing {spacing} mm by an integer factor")]
    NonIntegerRefinement { spacing: f64, h: f64 },
    #[error("label grid contains no tissue voxels")]
    Empty,
    #[error("invalid mesh: {0}")]
    Invalid(String),
    #[error("point {0:?} lies outside the mesh")]
    PointOutside([f64; 3]),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Local face numbering: `-x, +x, -y, +y, -z, +z`.
#[inline]
pub fn face_axis(face: u8) -> usize {
    (face / 2) as usize
}

/// `true` for the `+` side faces (1, 3, 5).
#[inline]
pub fn face_is_upper(face: u8) -> bool {
    face % 2 == 1
}

#[inline]
pub fn face_outward_normal(face: u8) -> [f64; 3] {
    let mut n = [0.0; 3];
    n[face_axis(face)] = if face_is_upper(face) { 1.0 } else { -1.0 };
    n
}

/// Maps face-plane coordinates `(s, t)` in `[0,1]^2` to cell reference
/// coordinates; `s, t` run along the two tangential axes in increasing order.
#[inline]
pub fn face_to_reference<T: crate::Real>(face: u8, s: T, t: T) -> [T; 3] {
    let axis = face_axis(face);
    let fixed = if face_is_upper(face) { T::one() } else { T::zero() };
    match axis {
        0 => [fixed, s, t],
        1 => [s, fixed, t],
        _ => [s, t, fixed],
    }
}
