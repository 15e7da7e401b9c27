//! Legacy ASCII VTK unstructured-grid output (hexahedron cells).
//!
//! Floating point values are written with 9 significant digits.

use std::io::Write;

use super::{HexMesh, MeshError};

/// VTK hexahedron corner order expressed in local tensor-product indices.
const VTK_HEX_ORDER: [usize; 8] = [0, 1, 3, 2, 4, 5, 7, 6];
const VTK_HEXAHEDRON: u8 = 12;

/// A named per-cell array.
#[derive(Clone, Debug)]
pub enum CellArray {
    Int { name: String, values: Vec<i64> },
    Scalar { name: String, values: Vec<f64> },
    Vector { name: String, values: Vec<[f64; 3]> },
}

impl CellArray {
    pub fn name(&self) -> &str {
        match self {
            Self::Int { name, .. } | Self::Scalar { name, .. } | Self::Vector { name, .. } => name,
        }
    }

    fn len(&self) -> usize {
        match self {
            Self::Int { values, .. } => values.len(),
            Self::Scalar { values, .. } => values.len(),
            Self::Vector { values, .. } => values.len(),
        }
    }
}

/// `{:.8e}` rendering: 9 significant digits, locale-free.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.8e}")
}

/// Label array for every cell of the mesh.
pub fn label_array(mesh: &HexMesh) -> CellArray {
    CellArray::Int { name: "label".into(), values: mesh.cell_labels().iter().map(|&l| l as i64).collect() }
}

/// Writes all cells of `mesh`; arrays must have one entry per cell.
pub fn write_vtk<W: Write>(mesh: &HexMesh, title: &str, arrays: &[CellArray], out: W) -> Result<(), MeshError> {
    let cells: Vec<u32> = (0..mesh.num_cells() as u32).collect();
    write_vtk_subset(mesh, &cells, title, arrays, out)
}

/// Writes only `cells` (mesh cell ids); arrays are indexed by mesh cell id.
/// Points not referenced by the subset are dropped and the rest renumbered.
pub fn write_vtk_subset<W: Write>(
    mesh: &HexMesh,
    cells: &[u32],
    title: &str,
    arrays: &[CellArray],
    out: W,
) -> Result<(), MeshError> {
    for a in arrays {
        if a.len() != mesh.num_cells() {
            return Err(MeshError::Invalid(format!("cell array `{}` has {} entries for {} cells", a.name(), a.len(), mesh.num_cells())));
        }
        if a.name().contains(char::is_whitespace) {
            return Err(MeshError::Invalid(format!("array name `{}` contains whitespace", a.name())));
        }
    }
    let mut out = std::io::BufWriter::new(out);
    let mut point_map = vec![u32::MAX; mesh.num_vertices()];
    let mut points = Vec::new();
    for &c in cells {
        let ids = mesh.cells()[c as usize];
        for v in VTK_HEX_ORDER.map(|local| ids[local]) {
            if point_map[v as usize] == u32::MAX {
                point_map[v as usize] = points.len() as u32;
                points.push(v);
            }
        }
    }
    let title = title.lines().next().unwrap_or("");
    writeln!(out, "# vtk DataFile Version 2.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", points.len())?;
    for &v in &points {
        let p = mesh.vertices()[v as usize];
        writeln!(out, "{} {} {}", fmt_float(p[0]), fmt_float(p[1]), fmt_float(p[2]))?;
    }
    writeln!(out, "CELLS {} {}", cells.len(), cells.len() * 9)?;
    for &c in cells {
        let ids = mesh.cells()[c as usize];
        write!(out, "8")?;
        for local in VTK_HEX_ORDER {
            write!(out, " {}", point_map[ids[local] as usize])?;
        }
        writeln!(out)?;
    }
    writeln!(out, "CELL_TYPES {}", cells.len())?;
    for _ in cells {
        writeln!(out, "{VTK_HEXAHEDRON}")?;
    }
    if !arrays.is_empty() {
        writeln!(out, "CELL_DATA {}", cells.len())?;
    }
    for a in arrays {
        match a {
            CellArray::Int { name, values } => {
                writeln!(out, "SCALARS {name} int 1")?;
                writeln!(out, "LOOKUP_TABLE default")?;
                for &c in cells {
                    writeln!(out, "{}", values[c as usize])?;
                }
            }
            CellArray::Scalar { name, values } => {
                writeln!(out, "SCALARS {name} double 1")?;
                writeln!(out, "LOOKUP_TABLE default")?;
                for &c in cells {
                    writeln!(out, "{}", fmt_float(values[c as usize]))?;
                }
            }
            CellArray::Vector { name, values } => {
                writeln!(out, "VECTORS {name} double")?;
                for &c in cells {
                    let v = values[c as usize];
                    writeln!(out, "{} {} {}", fmt_float(v[0]), fmt_float(v[1]), fmt_float(v[2]))?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}
