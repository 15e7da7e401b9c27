use super::EvalError;
use crate::femcore::{BasisSet, BASIS_SIZE};
use crate::hexmesh::HexMesh;
use crate::schemes::Scheme;

/// Point evaluation of a discrete function at `x` as `(dof, weight)` pairs.
pub fn point_functional(mesh: &HexMesh, scheme: Scheme, x: [f64; 3]) -> Result<Vec<(usize, f64)>, EvalError> {
    let cell = mesh.locate(x)?;
    let xi = mesh.to_reference(cell, x);
    let (values, _) = match scheme {
        Scheme::Cg => BasisSet::cg_trilinear(),
        Scheme::Dg => BasisSet::dg_orthonormal(),
    }
    .eval(xi);
    Ok(match scheme {
        Scheme::Cg => mesh.cells()[cell].iter().zip(values).map(|(&v, w)| (v as usize, w)).collect(),
        Scheme::Dg => (0..BASIS_SIZE).map(|i| (BASIS_SIZE * cell + i, values[i])).collect(),
    })
}

/// One functional per sensor: its point evaluation minus that of the
/// reference sensor. Constants are annihilated, so every functional is a
/// valid right-hand side for the pure Neumann problem; the reference row is
/// identically zero.
pub fn sensor_functionals(
    mesh: &HexMesh,
    scheme: Scheme,
    sensors: &[[f64; 3]],
    reference: usize,
) -> Result<Vec<Vec<(usize, f64)>>, EvalError> {
    if reference >= sensors.len() {
        return Err(EvalError::Invalid(format!("reference sensor {reference} of {}", sensors.len())));
    }
    let refs = point_functional(mesh, scheme, sensors[reference])?;
    sensors
        .iter()
        .map(|&x| {
            let mut f = point_functional(mesh, scheme, x)?;
            f.extend(refs.iter().map(|&(d, w)| (d, -w)));
            Ok(f)
        })
        .collect()
}
