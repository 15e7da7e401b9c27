use super::{face_axis, face_outward_normal, HexMesh, MeshError};

/// Face shared by two cells; `normal` points from `cell_e` into `cell_f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InternalFace {
    pub cell_e: u32,
    pub cell_f: u32,
    pub face_e: u8,
    pub face_f: u8,
    pub normal: [f64; 3],
    pub area: f64,
}

impl InternalFace {
    /// Same geometric face with the roles of the two cells exchanged.
    pub fn flipped(&self) -> Self {
        Self {
            cell_e: self.cell_f,
            cell_f: self.cell_e,
            face_e: self.face_f,
            face_f: self.face_e,
            normal: self.normal.map(|v| -v),
            area: self.area,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryFace {
    pub cell: u32,
    pub face: u8,
    pub normal: [f64; 3],
    pub area: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceRef {
    Internal(u32),
    Boundary(u32),
}

/// Internal faces (shared faces of positive area) and domain-boundary faces.
///
/// Edge- and corner-only contacts between cells produce no face.
#[derive(Clone, Debug)]
pub struct Skeleton {
    internal: Vec<InternalFace>,
    boundary: Vec<BoundaryFace>,
    cell_faces: Vec<[FaceRef; 6]>,
}

/// Enumerates faces cell by cell; internal faces are oriented from the cell
/// with the lower lattice coordinate to the upper one.
pub fn compute_skeleton(mesh: &HexMesh) -> Skeleton {
    let area = mesh.face_area_mm2();
    let mut internal = Vec::new();
    let mut boundary = Vec::new();
    for cell in 0..mesh.num_cells() {
        for face in 0..6u8 {
            match mesh.neighbor(cell, face) {
                Some(nb) => {
                    if face % 2 == 1 {
                        internal.push(InternalFace {
                            cell_e: cell as u32,
                            cell_f: nb as u32,
                            face_e: face,
                            face_f: face - 1,
                            normal: face_outward_normal(face),
                            area,
                        });
                    }
                }
                None => boundary.push(BoundaryFace {
                    cell: cell as u32,
                    face,
                    normal: face_outward_normal(face),
                    area,
                }),
            }
        }
    }
    Skeleton::from_faces(mesh, internal, boundary).expect("lattice skeleton is consistent")
}

impl Skeleton {
    /// Assembles a skeleton from explicit face lists, checking that every
    /// local face of every cell is covered exactly once.
    pub fn from_faces(mesh: &HexMesh, internal: Vec<InternalFace>, boundary: Vec<BoundaryFace>) -> Result<Self, MeshError> {
        const UNSET: FaceRef = FaceRef::Boundary(u32::MAX);
        let mut cell_faces = vec![[UNSET; 6]; mesh.num_cells()];
        let mut claim = |cell: u32, face: u8, r: FaceRef| -> Result<(), MeshError> {
            let slot = cell_faces
                .get_mut(cell as usize)
                .and_then(|f| f.get_mut(face as usize))
                .ok_or_else(|| MeshError::Invalid(format!("face ({cell}, {face}) out of range")))?;
            if *slot != UNSET {
                return Err(MeshError::Invalid(format!("face ({cell}, {face}) listed twice")));
            }
            *slot = r;
            Ok(())
        };
        for (n, f) in internal.iter().enumerate() {
            let expected = face_outward_normal(f.face_e);
            if expected != f.normal || face_axis(f.face_e) != face_axis(f.face_f) || f.face_e == f.face_f {
                return Err(MeshError::Invalid(format!("internal face {n} has inconsistent orientation")));
            }
            if mesh.neighbor(f.cell_e as usize, f.face_e) != Some(f.cell_f as usize) {
                return Err(MeshError::Invalid(format!("internal face {n} does not join neighbors")));
            }
            claim(f.cell_e, f.face_e, FaceRef::Internal(n as u32))?;
            claim(f.cell_f, f.face_f, FaceRef::Internal(n as u32))?;
        }
        for (n, f) in boundary.iter().enumerate() {
            if mesh.neighbor(f.cell as usize, f.face).is_some() {
                return Err(MeshError::Invalid(format!("boundary face {n} has a neighbor")));
            }
            claim(f.cell, f.face, FaceRef::Boundary(n as u32))?;
        }
        if cell_faces.iter().flatten().any(|r| *r == UNSET) {
            return Err(MeshError::Invalid("some cell faces are not covered".into()));
        }
        Ok(Self { internal, boundary, cell_faces })
    }

    pub fn internal_faces(&self) -> &[InternalFace] {
        &self.internal
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary
    }

    /// Face objects covering the six local faces of `cell`.
    pub fn cell_faces(&self, cell: usize) -> &[FaceRef; 6] {
        &self.cell_faces[cell]
    }

    /// Copy with the listed internal faces re-oriented.
    pub fn with_flipped(&self, mesh: &HexMesh, faces: &[usize]) -> Result<Self, MeshError> {
        let mut internal = self.internal.clone();
        for &f in faces {
            internal[f] = internal[f].flipped();
        }
        Self::from_faces(mesh, internal, self.boundary.clone())
    }
}
