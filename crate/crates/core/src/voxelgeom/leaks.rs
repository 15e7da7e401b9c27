use super::{CompartmentTable, LabelGrid, VoxelError};

/// Grid corner points where skin touches CSF or brain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LeakReport {
    pub leak_vertex_count: usize,
    /// Linear corner-point indices (see [`LabelGrid::vertex_index`]), ascending.
    pub leak_vertices: Vec<usize>,
    /// Sorted distinct non-air labels of the voxels incident to each leak vertex.
    pub incident_labels: Vec<Vec<u8>>,
}

const SKIN: u8 = 1;
const INNER: u8 = 2;

/// Counts grid corner points whose (up to eight) incident voxels include both
/// a skin voxel and a CSF-or-brain voxel.
pub fn detect_leaks(grid: &LabelGrid, table: &CompartmentTable) -> Result<LeakReport, VoxelError> {
    let roles = table.roles();
    let skin = roles.skin.ok_or(VoxelError::MissingRole("skin"))?;
    if roles.csf.is_none() && roles.brain.is_none() {
        return Err(VoxelError::MissingRole("csf or brain"));
    }
    let mut class = [0u8; 256];
    class[skin as usize] = SKIN;
    for l in [roles.csf, roles.brain].into_iter().flatten() {
        class[l as usize] |= INNER;
    }

    let [nx, ny, nz] = grid.dims();
    let vd = grid.vertex_dims();
    let labels = grid.labels();
    let mut flags = vec![0u8; vd[0] * vd[1] * vd[2]];
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let c = class[labels[(i * ny + j) * nz + k] as usize];
                if c == 0 {
                    continue;
                }
                for di in 0..2 {
                    for dj in 0..2 {
                        for dk in 0..2 {
                            flags[((i + di) * vd[1] + j + dj) * vd[2] + k + dk] |= c;
                        }
                    }
                }
            }
        }
    }

    let mut report = LeakReport::default();
    for (v, &f) in flags.iter().enumerate() {
        if f != SKIN | INNER {
            continue;
        }
        report.leak_vertices.push(v);
        report.incident_labels.push(incident_labels(grid, v));
    }
    report.leak_vertex_count = report.leak_vertices.len();
    Ok(report)
}

fn incident_labels(grid: &LabelGrid, vertex: usize) -> Vec<u8> {
    let [vi, vj, vk] = grid.vertex_ijk(vertex);
    let dims = grid.dims();
    let mut out = Vec::with_capacity(8);
    for i in vi.saturating_sub(1)..(vi + 1).min(dims[0]) {
        for j in vj.saturating_sub(1)..(vj + 1).min(dims[1]) {
            for k in vk.saturating_sub(1)..(vk + 1).min(dims[2]) {
                let l = grid.label(i, j, k);
                if l != 0 && !out.contains(&l) {
                    out.push(l);
                }
            }
        }
    }
    out.sort_unstable();
    out
}
