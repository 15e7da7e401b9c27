use super::MeshError;
use crate::voxelgeom::LabelGrid;

/// Tensor-product local vertex order: local vertex `a + 2b + 4c` sits at
/// reference offset `(a, b, c)`.
pub const LOCAL_VERTEX_OFFSETS: [[u32; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [0, 1, 0],
    [1, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [0, 1, 1],
    [1, 1, 1],
];

const NONE: u32 = u32::MAX;

/// Conforming mesh of axis-aligned cubes of edge `h` on a regular lattice.
///
/// Cells are the non-air cells of the lattice in row-major lattice order;
/// vertices are the lattice points referenced by at least one cell, also in
/// lattice order.
#[derive(Clone, Debug)]
pub struct HexMesh {
    vertices: Vec<[f64; 3]>,
    cells: Vec<[u32; 8]>,
    cell_labels: Vec<u8>,
    h: f64,
    origin: [f64; 3],
    lattice_dims: [usize; 3],
    cell_ijk: Vec<[u32; 3]>,
    vertex_ijk: Vec<[u32; 3]>,
    cell_lookup: Vec<u32>,
    vertex_lookup: Vec<u32>,
}

/// Builds the mesh, splitting each tissue voxel into `r^3` cells with
/// `r = spacing / mesh_resolution_mm`.
pub fn build_hex_mesh(grid: &LabelGrid, mesh_resolution_mm: f64) -> Result<HexMesh, MeshError> {
    let spacing = grid.spacing_mm();
    if !(mesh_resolution_mm > 0.0 && mesh_resolution_mm.is_finite()) {
        return Err(MeshError::NonIntegerRefinement { spacing, h: mesh_resolution_mm });
    }
    let ratio = spacing / mesh_resolution_mm;
    let r = ratio.round();
    if r < 1.0 || (ratio - r).abs() > 1e-9 * r {
        return Err(MeshError::NonIntegerRefinement { spacing, h: mesh_resolution_mm });
    }
    let r = r as usize;
    let gd = grid.dims();
    let dims = [gd[0] * r, gd[1] * r, gd[2] * r];
    let mut labels = vec![0u8; dims[0] * dims[1] * dims[2]];
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            let row = (i * dims[1] + j) * dims[2];
            for k in 0..dims[2] {
                labels[row + k] = grid.label(i / r, j / r, k / r);
            }
        }
    }
    HexMesh::from_lattice(grid.origin_mm(), spacing / r as f64, dims, &labels)
}

impl HexMesh {
    /// Mesh from per-lattice-cell labels (row-major, `k` fastest, 0 = excluded).
    pub fn from_lattice(origin: [f64; 3], h: f64, dims: [usize; 3], labels: &[u8]) -> Result<Self, MeshError> {
        if labels.len() != dims[0] * dims[1] * dims[2] {
            return Err(MeshError::Invalid("label count does not match lattice dims".into()));
        }
        if !(h > 0.0) {
            return Err(MeshError::Invalid(format!("edge length must be positive, got {h}")));
        }
        let vd = [dims[0] + 1, dims[1] + 1, dims[2] + 1];
        if vd[0] * vd[1] * vd[2] >= NONE as usize {
            return Err(MeshError::Invalid("lattice too large for 32-bit indices".into()));
        }
        let mut cell_lookup = vec![NONE; labels.len()];
        let mut cell_ijk = Vec::new();
        let mut cell_labels = Vec::new();
        let mut used = vec![false; vd[0] * vd[1] * vd[2]];
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let idx = (i * dims[1] + j) * dims[2] + k;
                    if labels[idx] == 0 {
                        continue;
                    }
                    cell_lookup[idx] = cell_ijk.len() as u32;
                    cell_ijk.push([i as u32, j as u32, k as u32]);
                    cell_labels.push(labels[idx]);
                    for o in LOCAL_VERTEX_OFFSETS {
                        used[((i + o[0] as usize) * vd[1] + j + o[1] as usize) * vd[2] + k + o[2] as usize] = true;
                    }
                }
            }
        }
        if cell_ijk.is_empty() {
            return Err(MeshError::Empty);
        }
        let mut vertex_lookup = vec![NONE; used.len()];
        let mut vertices = Vec::new();
        let mut vertex_ijk = Vec::new();
        for (v, &u) in used.iter().enumerate() {
            if !u {
                continue;
            }
            let k = v % vd[2];
            let j = (v / vd[2]) % vd[1];
            let i = v / (vd[1] * vd[2]);
            vertex_lookup[v] = vertices.len() as u32;
            vertices.push([
                origin[0] + i as f64 * h,
                origin[1] + j as f64 * h,
                origin[2] + k as f64 * h,
            ]);
            vertex_ijk.push([i as u32, j as u32, k as u32]);
        }
        let cells = cell_ijk
            .iter()
            .map(|c| {
                let mut ids = [0u32; 8];
                for (n, o) in LOCAL_VERTEX_OFFSETS.iter().enumerate() {
                    let v = ((c[0] + o[0]) as usize * vd[1] + (c[1] + o[1]) as usize) * vd[2] + (c[2] + o[2]) as usize;
                    ids[n] = vertex_lookup[v];
                }
                ids
            })
            .collect();
        Ok(Self {
            vertices,
            cells,
            cell_labels,
            h,
            origin,
            lattice_dims: dims,
            cell_ijk,
            vertex_ijk,
            cell_lookup,
            vertex_lookup,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[u32; 8]] {
        &self.cells
    }

    pub fn cell_labels(&self) -> &[u8] {
        &self.cell_labels
    }

    pub fn cell_label(&self, cell: usize) -> u8 {
        self.cell_labels[cell]
    }

    /// Uniform cell edge length `h` (mm).
    pub fn cell_edge_mm(&self) -> f64 {
        self.h
    }

    pub fn cell_volume_mm3(&self) -> f64 {
        self.h * self.h * self.h
    }

    pub fn face_area_mm2(&self) -> f64 {
        self.h * self.h
    }

    pub fn lattice_origin(&self) -> [f64; 3] {
        self.origin
    }

    /// Cells per axis of the underlying lattice.
    pub fn lattice_dims(&self) -> [usize; 3] {
        self.lattice_dims
    }

    pub fn cell_ijk(&self, cell: usize) -> [u32; 3] {
        self.cell_ijk[cell]
    }

    pub fn vertex_ijk(&self, vertex: usize) -> [u32; 3] {
        self.vertex_ijk[vertex]
    }

    /// Lower corner of a cell.
    pub fn cell_origin(&self, cell: usize) -> [f64; 3] {
        self.vertices[self.cells[cell][0] as usize]
    }

    pub fn cell_centroid(&self, cell: usize) -> [f64; 3] {
        let o = self.cell_origin(cell);
        let hh = 0.5 * self.h;
        [o[0] + hh, o[1] + hh, o[2] + hh]
    }

    pub fn face_centroid(&self, cell: usize, face: u8) -> [f64; 3] {
        let mut c = self.cell_centroid(cell);
        let axis = super::face_axis(face);
        c[axis] += if super::face_is_upper(face) { 0.5 * self.h } else { -0.5 * self.h };
        c
    }

    /// Cell at lattice position, if present.
    pub fn cell_at(&self, i: isize, j: isize, k: isize) -> Option<usize> {
        let d = self.lattice_dims;
        if i < 0 || j < 0 || k < 0 || i as usize >= d[0] || j as usize >= d[1] || k as usize >= d[2] {
            return None;
        }
        let id = self.cell_lookup[(i as usize * d[1] + j as usize) * d[2] + k as usize];
        (id != NONE).then_some(id as usize)
    }

    /// Vertex at lattice point, if present.
    pub fn vertex_at(&self, i: isize, j: isize, k: isize) -> Option<usize> {
        let d = self.lattice_dims;
        if i < 0 || j < 0 || k < 0 || i as usize > d[0] || j as usize > d[1] || k as usize > d[2] {
            return None;
        }
        let id = self.vertex_lookup[(i as usize * (d[1] + 1) + j as usize) * (d[2] + 1) + k as usize];
        (id != NONE).then_some(id as usize)
    }

    /// Face neighbor of `cell` across local face `face`.
    pub fn neighbor(&self, cell: usize, face: u8) -> Option<usize> {
        let [i, j, k] = self.cell_ijk[cell].map(|v| v as isize);
        let step = if super::face_is_upper(face) { 1 } else { -1 };
        match super::face_axis(face) {
            0 => self.cell_at(i + step, j, k),
            1 => self.cell_at(i, j + step, k),
            _ => self.cell_at(i, j, k + step),
        }
    }

    /// Cell containing `x`. Points on shared faces, edges or corners resolve
    /// to the lexicographically lowest lattice cell among the candidates.
    pub fn locate(&self, x: [f64; 3]) -> Result<usize, MeshError> {
        let mut candidates: [[isize; 2]; 3] = [[0; 2]; 3];
        let mut counts = [0usize; 3];
        for d in 0..3 {
            let s = (x[d] - self.origin[d]) / self.h;
            if !s.is_finite() {
                return Err(MeshError::PointOutside(x));
            }
            let f = s.floor();
            if s == f {
                candidates[d] = [f as isize - 1, f as isize];
                counts[d] = 2;
            } else {
                candidates[d] = [f as isize, 0];
                counts[d] = 1;
            }
        }
        for &i in &candidates[0][..counts[0]] {
            for &j in &candidates[1][..counts[1]] {
                for &k in &candidates[2][..counts[2]] {
                    if let Some(c) = self.cell_at(i, j, k) {
                        return Ok(c);
                    }
                }
            }
        }
        Err(MeshError::PointOutside(x))
    }

    /// Reference coordinates of `x` in `cell` (not clamped).
    pub fn to_reference(&self, cell: usize, x: [f64; 3]) -> [f64; 3] {
        let o = self.cell_origin(cell);
        [(x[0] - o[0]) / self.h, (x[1] - o[1]) / self.h, (x[2] - o[2]) / self.h]
    }

    /// Cells incident to a vertex, indexed by the vertex's local position in
    /// each (`local = a + 2b + 4c`, cell at lattice offset `-(a, b, c)`).
    pub fn vertex_cells(&self, vertex: usize) -> [Option<usize>; 8] {
        let [i, j, k] = self.vertex_ijk[vertex].map(|v| v as isize);
        let mut out = [None; 8];
        for (local, o) in LOCAL_VERTEX_OFFSETS.iter().enumerate() {
            out[local] = self.cell_at(i - o[0] as isize, j - o[1] as isize, k - o[2] as isize);
        }
        out
    }

    /// Stable digest of the lattice geometry and labels.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(self.h.to_le_bytes());
        for o in self.origin {
            hasher.update(o.to_le_bytes());
        }
        for d in self.lattice_dims {
            hasher.update((d as u64).to_le_bytes());
        }
        for (c, l) in self.cell_ijk.iter().zip(&self.cell_labels) {
            for v in c {
                hasher.update(v.to_le_bytes());
            }
            hasher.update([*l]);
        }
        hasher.finalize().iter().take(16).map(|b| format!("{b:02x}")).collect()
    }
}
