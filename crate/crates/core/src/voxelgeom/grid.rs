use super::VoxelError;

/// Tissue labels on a regular, isotropic voxel lattice.
///
/// Labels are stored row-major over `dims = [nx, ny, nz]` with `k` fastest:
/// `index = (i * ny + j) * nz + k`. `origin_mm` is the lower corner of voxel
/// `(0, 0, 0)`, so the center of voxel `(i, j, k)` sits at
/// `origin + (i + 1/2, j + 1/2, k + 1/2) * spacing`. Label 0 is air.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelGrid {
    dims: [usize; 3],
    spacing_mm: f64,
    origin_mm: [f64; 3],
    labels: Vec<u8>,
}

impl LabelGrid {
    pub fn new(
        dims: [usize; 3],
        spacing_mm: f64,
        origin_mm: [f64; 3],
        labels: Vec<u8>,
    ) -> Result<Self, VoxelError> {
        if dims.iter().any(|&d| d == 0) {
            return Err(VoxelError::InvalidGrid(format!("dims must be positive, got {dims:?}")));
        }
        if !(spacing_mm > 0.0 && spacing_mm.is_finite()) {
            return Err(VoxelError::InvalidGrid(format!("spacing must be positive, got {spacing_mm}")));
        }
        if origin_mm.iter().any(|o| !o.is_finite()) {
            return Err(VoxelError::InvalidGrid("origin must be finite".into()));
        }
        let n = dims[0] * dims[1] * dims[2];
        if labels.len() != n {
            return Err(VoxelError::InvalidGrid(format!(
                "expected {n} labels for dims {dims:?}, got {}",
                labels.len()
            )));
        }
        Ok(Self { dims, spacing_mm, origin_mm, labels })
    }

    /// Grid filled with a single label.
    pub fn filled(dims: [usize; 3], spacing_mm: f64, origin_mm: [f64; 3], label: u8) -> Result<Self, VoxelError> {
        Self::new(dims, spacing_mm, origin_mm, vec![label; dims[0] * dims[1] * dims[2]])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing_mm(&self) -> f64 {
        self.spacing_mm
    }

    pub fn origin_mm(&self) -> [f64; 3] {
        self.origin_mm
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn ijk(&self, index: usize) -> [usize; 3] {
        let k = index % self.dims[2];
        let rest = index / self.dims[2];
        [rest / self.dims[1], rest % self.dims[1], k]
    }

    #[inline]
    pub fn label(&self, i: usize, j: usize, k: usize) -> u8 {
        self.labels[self.index(i, j, k)]
    }

    pub fn set_label(&mut self, i: usize, j: usize, k: usize, label: u8) {
        let idx = self.index(i, j, k);
        self.labels[idx] = label;
    }

    pub fn voxel_center(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let s = self.spacing_mm;
        [
            self.origin_mm[0] + (i as f64 + 0.5) * s,
            self.origin_mm[1] + (j as f64 + 0.5) * s,
            self.origin_mm[2] + (k as f64 + 0.5) * s,
        ]
    }

    /// Number of non-air voxels.
    pub fn count_nonzero(&self) -> usize {
        self.labels.iter().filter(|&&l| l != 0).count()
    }

    pub fn count_label(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Corner-point lattice dimensions `(nx + 1, ny + 1, nz + 1)`.
    pub fn vertex_dims(&self) -> [usize; 3] {
        [self.dims[0] + 1, self.dims[1] + 1, self.dims[2] + 1]
    }

    /// Linear index of grid corner point `(i, j, k)`, same ordering as voxels.
    #[inline]
    pub fn vertex_index(&self, i: usize, j: usize, k: usize) -> usize {
        let vd = self.vertex_dims();
        (i * vd[1] + j) * vd[2] + k
    }

    pub fn vertex_ijk(&self, index: usize) -> [usize; 3] {
        let vd = self.vertex_dims();
        let k = index % vd[2];
        let rest = index / vd[2];
        [rest / vd[1], rest % vd[1], k]
    }

    pub fn vertex_position(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let s = self.spacing_mm;
        [
            self.origin_mm[0] + i as f64 * s,
            self.origin_mm[1] + j as f64 * s,
            self.origin_mm[2] + k as f64 * s,
        ]
    }

    /// Rotates the grid by 90 degrees about the z axis: `(i, j) -> (ny - 1 - j, i)`.
    pub fn rotated_z90(&self) -> Self {
        let [nx, ny, nz] = self.dims;
        let dims = [ny, nx, nz];
        let mut labels = vec![0u8; self.labels.len()];
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    let (ni, nj) = (ny - 1 - j, i);
                    labels[(ni * dims[1] + nj) * nz + k] = self.label(i, j, k);
                }
            }
        }
        let o = self.origin_mm;
        Self { dims, spacing_mm: self.spacing_mm, origin_mm: [o[1], o[0], o[2]], labels }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inconsistent_length() {
        assert!(LabelGrid::new([2, 2, 2], 1.0, [0.0; 3], vec![0; 7]).is_err());
        assert!(LabelGrid::new([2, 2, 2], 0.0, [0.0; 3], vec![0; 8]).is_err());
        assert!(LabelGrid::new([0, 2, 2], 1.0, [0.0; 3], vec![]).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let g = LabelGrid::filled([3, 4, 5], 1.0, [0.0; 3], 1).unwrap();
        for idx in 0..g.len() {
            let [i, j, k] = g.ijk(idx);
            assert_eq!(g.index(i, j, k), idx);
        }
        for idx in 0..60 {
            let [i, j, k] = g.vertex_ijk(idx);
            assert_eq!(g.vertex_index(i, j, k), idx);
        }
    }

    #[test]
    fn voxel_centers_are_half_offset() {
        let g = LabelGrid::filled([2, 2, 2], 4.0, [-4.0, -4.0, -4.0], 1).unwrap();
        assert_eq!(g.voxel_center(0, 0, 0), [-2.0, -2.0, -2.0]);
        assert_eq!(g.voxel_center(1, 1, 1), [2.0, 2.0, 2.0]);
    }
}
