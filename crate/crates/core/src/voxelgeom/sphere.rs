use super::{CompartmentTable, LabelGrid, VoxelError};

#[derive(Clone, Debug, PartialEq)]
pub enum SegmentationWarning {
    /// A shell is not thicker than the voxel size; the model is leaky by
    /// construction.
    ShellThinnerThanResolution { label: u8, thickness_mm: f64, resolution_mm: f64 },
}

impl std::fmt::Display for SegmentationWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::ShellThinnerThanResolution { label, thickness_mm, resolution_mm } => write!(
                f,
                "shell with label {label} is {thickness_mm} mm thick, not thicker than the {resolution_mm} mm resolution"
            ),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SphereSegmentation {
    pub grid: LabelGrid,
    pub warnings: Vec<SegmentationWarning>,
}

/// Voxelizes concentric spheres centered at the origin.
///
/// Each voxel takes the label of the innermost compartment whose outer
/// radius is at least the distance of the voxel center to the origin. The
/// grid is symmetric about the origin (which is a lattice corner) and
/// padded with `ceil(grid_padding_mm / resolution)` air voxels per side.
pub fn generate_sphere_segmentation(
    table: &CompartmentTable,
    resolution_mm: f64,
    grid_padding_mm: f64,
) -> Result<SphereSegmentation, VoxelError> {
    if !(resolution_mm > 0.0 && resolution_mm.is_finite()) {
        return Err(VoxelError::InvalidGrid(format!("resolution must be positive, got {resolution_mm}")));
    }
    if !(grid_padding_mm >= 0.0 && grid_padding_mm.is_finite()) {
        return Err(VoxelError::InvalidGrid(format!("padding must be non-negative, got {grid_padding_mm}")));
    }
    let radii = table.sphere_radii()?;
    let labels_in: Vec<u8> = table.entries().iter().map(|c| c.label).collect();

    let mut warnings = Vec::new();
    let mut inner = 0.0;
    for (c, &r) in table.entries().iter().zip(&radii) {
        let thickness = r - inner;
        if resolution_mm >= thickness {
            let w = SegmentationWarning::ShellThinnerThanResolution {
                label: c.label,
                thickness_mm: thickness,
                resolution_mm,
            };
            log::warn!("{w}");
            warnings.push(w);
        }
        inner = r;
    }

    let outer = *radii.last().expect("non-empty table");
    let pad = (grid_padding_mm / resolution_mm).ceil() as usize;
    let half = (outer / resolution_mm).ceil() as usize + pad;
    let n = 2 * half;
    let origin = -(half as f64) * resolution_mm;
    let radii_sq: Vec<f64> = radii.iter().map(|r| r * r).collect();

    // centers along one axis, reused for all three
    let centers: Vec<f64> = (0..n).map(|i| origin + (i as f64 + 0.5) * resolution_mm).collect();
    let mut labels = vec![0u8; n * n * n];
    for (i, &x) in centers.iter().enumerate() {
        for (j, &y) in centers.iter().enumerate() {
            let rxy = x * x + y * y;
            if rxy > radii_sq[radii_sq.len() - 1] {
                continue;
            }
            let row = (i * n + j) * n;
            for (k, &z) in centers.iter().enumerate() {
                let d2 = rxy + z * z;
                if let Some(pos) = radii_sq.iter().position(|&r2| d2 <= r2) {
                    labels[row + k] = labels_in[pos];
                }
            }
        }
    }
    let grid = LabelGrid::new([n, n, n], resolution_mm, [origin; 3], labels)?;
    Ok(SphereSegmentation { grid, warnings })
}
