use crate::analytic::Dipole;
use crate::femcore::BasisSet;
use crate::hexmesh::{HexMesh, Skeleton};
use crate::sparse::CsrMatrix;
use crate::Real;

use super::source::{boundary_term, volume_term, SourceTables};
use super::{
    AssembledRhs, AssemblyWarning, ConductivityField, ReferenceBlocks, RhsOptions, SchemeError, SubtractionSplit,
};

/// Vertex-based stiffness matrix `∫ σ ∇φ_i · ∇φ_j` of trilinear elements.
pub fn assemble_operator_cg<T: Real>(mesh: &HexMesh, field: &ConductivityField<T>) -> Result<CsrMatrix<T>, SchemeError> {
    let reference = ReferenceBlocks::new(BasisSet::cg_trilinear(), 3)?;
    let nv = mesh.num_vertices();
    let cells = mesh.cells();

    let mut row_ptr = Vec::with_capacity(nv + 1);
    let mut col_idx: Vec<u32> = Vec::with_capacity(nv * 27);
    row_ptr.push(0);
    let mut scratch: Vec<u32> = Vec::with_capacity(64);
    for v in 0..nv {
        scratch.clear();
        for c in mesh.vertex_cells(v).into_iter().flatten() {
            scratch.extend_from_slice(&cells[c]);
        }
        scratch.sort_unstable();
        scratch.dedup();
        col_idx.extend_from_slice(&scratch);
        row_ptr.push(col_idx.len());
    }
    let mut values = vec![T::zero(); col_idx.len()];
    let h = field.h();
    for (c, verts) in cells.iter().enumerate() {
        let s = field.sigma(c) * h;
        for (i, &vi) in verts.iter().enumerate() {
            let span = row_ptr[vi as usize]..row_ptr[vi as usize + 1];
            let cols = &col_idx[span.clone()];
            for (j, &vj) in verts.iter().enumerate() {
                let k = cols.binary_search(&vj).expect("vertex pattern contains cell neighbors");
                values[span.start + k] += s * reference.stiffness[i][j];
            }
        }
    }
    Ok(CsrMatrix::from_raw(nv, nv, row_ptr, col_idx, values))
}

/// `-∫ σ^corr ∇u∞ · ∇φ_i - ∫_{∂Ω} σ∞ ∂_n u∞ φ_i` for every vertex function.
pub fn assemble_rhs_cg<T: Real>(
    mesh: &HexMesh,
    skeleton: &Skeleton,
    field: &ConductivityField<T>,
    split: &SubtractionSplit<T>,
    dipole: &Dipole<T>,
    opts: &RhsOptions,
) -> Result<AssembledRhs<T>, SchemeError> {
    let tables = SourceTables::new(&BasisSet::cg_trilinear(), opts)?;
    let mut b = vec![T::zero(); mesh.num_vertices()];
    let cells = mesh.cells();
    for c in 0..mesh.num_cells() {
        if let Some(local) = volume_term(mesh, field, split, dipole, &tables, c)? {
            for (i, &v) in cells[c].iter().enumerate() {
                b[v as usize] += local[i];
            }
        }
    }
    for bf in skeleton.boundary_faces() {
        let local = boundary_term(mesh, field, split, dipole, &tables, bf, opts.exact_boundary_flux)?;
        for (i, &v) in cells[bf.cell as usize].iter().enumerate() {
            b[v as usize] += local[i];
        }
    }
    Ok(AssembledRhs { values: b, warnings: warnings(split) })
}

pub(crate) fn warnings<T: Real>(split: &SubtractionSplit<T>) -> Vec<AssemblyWarning> {
    if split.valid {
        Vec::new()
    } else {
        log::warn!("source cell {} is not surrounded by cells of its own label", split.source_cell);
        vec![AssemblyWarning::SourceNeighborhoodNotHomogeneous { cell: split.source_cell }]
    }
}
