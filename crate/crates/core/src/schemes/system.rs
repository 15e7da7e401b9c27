use std::fmt;
use std::str::FromStr;

use crate::hexmesh::{face_to_reference, BoundaryFace, HexMesh};
use crate::real::v3;
use crate::sparse::CsrMatrix;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Cg,
    Dg,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Cg => "cg",
            Scheme::Dg => "dg",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cg" => Ok(Scheme::Cg),
            "dg" => Ok(Scheme::Dg),
            other => Err(format!("unknown scheme `{other}` (expected cg or dg)")),
        }
    }
}

/// Degree-of-freedom numbering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofLayout {
    /// One unknown per mesh vertex.
    Cg { num_vertices: usize },
    /// Eight modal unknowns per cell, `8 * cell + mode`.
    Dg { num_cells: usize },
}

impl DofLayout {
    pub fn scheme(&self) -> Scheme {
        match self {
            DofLayout::Cg { .. } => Scheme::Cg,
            DofLayout::Dg { .. } => Scheme::Dg,
        }
    }

    pub fn num_dofs(&self) -> usize {
        match *self {
            DofLayout::Cg { num_vertices } => num_vertices,
            DofLayout::Dg { num_cells } => 8 * num_cells,
        }
    }

    pub fn block_size(&self) -> usize {
        match self {
            DofLayout::Cg { .. } => 1,
            DofLayout::Dg { .. } => 8,
        }
    }

    /// Coefficients of the globally constant function 1.
    pub fn constant_mode<T: Real>(&self) -> Vec<T> {
        match *self {
            DofLayout::Cg { num_vertices } => vec![T::one(); num_vertices],
            DofLayout::Dg { num_cells } => {
                let mut v = vec![T::zero(); 8 * num_cells];
                v.iter_mut().step_by(8).for_each(|x| *x = T::one());
                v
            }
        }
    }

    /// Indices where the constant mode is non-zero.
    pub fn constant_mode_dofs(&self) -> Box<dyn Iterator<Item = usize>> {
        match *self {
            DofLayout::Cg { num_vertices } => Box::new(0..num_vertices),
            DofLayout::Dg { num_cells } => Box::new((0..num_cells).map(|c| 8 * c)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LinearSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
    pub layout: DofLayout,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AssemblyWarning {
    /// The source cell touches a cell of another label or the mesh boundary.
    SourceNeighborhoodNotHomogeneous { cell: usize },
}

#[derive(Clone, Debug)]
pub struct AssembledRhs<T> {
    pub values: Vec<T>,
    pub warnings: Vec<AssemblyWarning>,
}

/// Quadrature choices for the source terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RhsOptions {
    pub volume_degree: usize,
    pub face_degree: usize,
    /// Replace the quadrature value of each boundary face's total current
    /// by its closed form, which makes the right-hand side exactly
    /// compatible with the pure Neumann problem.
    pub exact_boundary_flux: bool,
}

impl Default for RhsOptions {
    fn default() -> Self {
        Self { volume_degree: 5, face_degree: 5, exact_boundary_flux: true }
    }
}

/// Corners of a boundary face, counter-clockwise about its outward normal.
pub fn boundary_face_polygon<T: Real>(mesh: &HexMesh, face: &BoundaryFace) -> [[T; 3]; 4] {
    let o = mesh.cell_origin(face.cell as usize);
    let h = mesh.cell_edge_mm();
    let corner = |s: f64, t: f64| {
        let r = face_to_reference(face.face, s, t);
        v3::from_f64::<T>([o[0] + h * r[0], o[1] + h * r[1], o[2] + h * r[2]])
    };
    let mut poly = [corner(0.0, 0.0), corner(1.0, 0.0), corner(1.0, 1.0), corner(0.0, 1.0)];
    let e1 = v3::sub(poly[1], poly[0]);
    let e2 = v3::sub(poly[2], poly[1]);
    if v3::dot(v3::cross(e1, e2), v3::from_f64(face.normal)) < T::zero() {
        poly.swap(1, 3);
    }
    poly
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexmesh::compute_skeleton;

    #[test]
    fn polygons_are_outward() {
        let mesh = HexMesh::from_lattice([0.0; 3], 2.0, [1, 1, 1], &[1]).unwrap();
        let sk = compute_skeleton(&mesh);
        for bf in sk.boundary_faces() {
            let p: [[f64; 3]; 4] = boundary_face_polygon(&mesh, bf);
            let n = v3::cross(v3::sub(p[1], p[0]), v3::sub(p[2], p[1]));
            assert!(v3::dot(n, bf.normal) > 0.0);
            let c = mesh.face_centroid(0, bf.face);
            let mean = [0, 1, 2].map(|d| p.iter().map(|q| q[d]).sum::<f64>() / 4.0);
            assert_eq!(mean, c);
        }
    }

    #[test]
    fn constant_modes() {
        let l = DofLayout::Dg { num_cells: 2 };
        assert_eq!(l.constant_mode::<f64>(), vec![1., 0., 0., 0., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0.]);
        assert_eq!(l.constant_mode_dofs().collect::<Vec<_>>(), vec![0, 8]);
        assert_eq!(DofLayout::Cg { num_vertices: 3 }.num_dofs(), 3);
        assert_eq!("DG".parse::<Scheme>().unwrap(), Scheme::Dg);
        assert!("fv".parse::<Scheme>().is_err());
    }
}
