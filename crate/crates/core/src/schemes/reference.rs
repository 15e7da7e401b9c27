use crate::femcore::{quadrature_rule, BasisSet, QuadratureEntity, BASIS_SIZE};
use crate::hexmesh::{face_axis, face_is_upper, face_to_reference};
use crate::Real;

use super::SchemeError;

type Block<T> = [[T; BASIS_SIZE]; BASIS_SIZE];

/// Reference-face coupling matrices for a face seen from a cell `e` through
/// its local face `face_e`, with `f` the neighbor across it and the normal
/// pointing from `e` to `f`. Index 0 is the `e` side, 1 the `f` side.
///
/// `trace_flux[s][t][i][j] = ∫ ±φ_i^s ∂_n φ_j^t` and
/// `trace_trace[s][t][i][j] = ∫ ±φ_i^s ±φ_j^t` over the unit face, where the
/// sign is `+` on `e` and `-` on `f` (so `±φ` is the jump of `φ`).
#[derive(Clone, Debug)]
pub struct FaceBlocks<T> {
    pub trace_flux: [[Block<T>; 2]; 2],
    pub trace_trace: [[Block<T>; 2]; 2],
}

/// Unit-cube stiffness and face matrices for one basis. Physical blocks on a
/// cube of edge `h` are these times `h`.
#[derive(Clone, Debug)]
pub struct ReferenceBlocks<T> {
    pub basis: BasisSet<T>,
    pub stiffness: Block<T>,
    pub faces: [FaceBlocks<T>; 6],
}

pub(crate) fn opposite_face(face: u8) -> u8 {
    face ^ 1
}

fn clean<T: Real>(b: &mut Block<T>, scale: T) {
    let tol = T::lit(1e-13) * scale;
    for row in b.iter_mut() {
        for v in row.iter_mut() {
            if v.abs() <= tol {
                *v = T::zero();
            }
        }
    }
}

impl<T: Real> ReferenceBlocks<T> {
    pub fn new(basis: BasisSet<T>, degree: usize) -> Result<Self, SchemeError> {
        let cell_rule = quadrature_rule::<T>(QuadratureEntity::Cell, degree)?;
        let face_rule = quadrature_rule::<T>(QuadratureEntity::Face, degree)?;
        let zero = [[T::zero(); BASIS_SIZE]; BASIS_SIZE];

        let mut stiffness = zero;
        for (p, w) in cell_rule.iter() {
            let (_, g) = basis.eval(p);
            for i in 0..BASIS_SIZE {
                for j in 0..BASIS_SIZE {
                    stiffness[i][j] += w * (g[i][0] * g[j][0] + g[i][1] * g[j][1] + g[i][2] * g[j][2]);
                }
            }
        }
        let scale = stiffness.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
        clean(&mut stiffness, scale);

        let empty = FaceBlocks { trace_flux: [[zero; 2]; 2], trace_trace: [[zero; 2]; 2] };
        let mut faces: [FaceBlocks<T>; 6] = std::array::from_fn(|_| empty.clone());
        for (face_e, blocks) in faces.iter_mut().enumerate() {
            let face_e = face_e as u8;
            let face_f = opposite_face(face_e);
            let axis = face_axis(face_e);
            let nsign = if face_is_upper(face_e) { T::one() } else { -T::one() };
            for (q, w) in face_rule.iter() {
                let mut vals = [[T::zero(); BASIS_SIZE]; 2];
                let mut dn = [[T::zero(); BASIS_SIZE]; 2];
                for (side, lf) in [face_e, face_f].into_iter().enumerate() {
                    let (v, g) = basis.eval(face_to_reference(lf, q[0], q[1]));
                    let sgn = if side == 0 { T::one() } else { -T::one() };
                    for i in 0..BASIS_SIZE {
                        vals[side][i] = sgn * v[i];
                        dn[side][i] = nsign * g[i][axis];
                    }
                }
                for s in 0..2 {
                    for t in 0..2 {
                        for i in 0..BASIS_SIZE {
                            for j in 0..BASIS_SIZE {
                                blocks.trace_flux[s][t][i][j] += w * vals[s][i] * dn[t][j];
                                blocks.trace_trace[s][t][i][j] += w * vals[s][i] * vals[t][j];
                            }
                        }
                    }
                }
            }
            let scale = blocks
                .trace_flux
                .iter()
                .chain(blocks.trace_trace.iter())
                .flatten()
                .flatten()
                .flatten()
                .fold(T::zero(), |m, v| m.max(v.abs()));
            for b in blocks.trace_flux.iter_mut().chain(blocks.trace_trace.iter_mut()).flatten() {
                clean(b, scale);
            }
        }
        Ok(Self { basis, stiffness, faces })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Unit-cube trilinear stiffness from its closed form: entries depend on
    /// how many coordinates two vertices share.
    fn textbook_hex_stiffness() -> [[f64; 8]; 8] {
        let mut k = [[0.0; 8]; 8];
        for i in 0..8 {
            for j in 0..8 {
                let differ = ((i ^ j) as u32).count_ones();
                k[i][j] = match differ {
                    0 => 4.0 / 12.0,
                    1 => 0.0,
                    2 => -1.0 / 12.0,
                    _ => -1.0 / 12.0,
                };
            }
        }
        k
    }

    #[test]
    fn cg_unit_cube_stiffness_matches_textbook() {
        let r = ReferenceBlocks::<f64>::new(BasisSet::cg_trilinear(), 3).unwrap();
        let k = textbook_hex_stiffness();
        for i in 0..8 {
            for j in 0..8 {
                assert!((r.stiffness[i][j] - k[i][j]).abs() < 1e-14, "{i},{j}");
            }
        }
    }

    #[test]
    fn dg_stiffness_is_diagonal() {
        let r = ReferenceBlocks::<f64>::new(BasisSet::dg_orthonormal(), 3).unwrap();
        let expected = [0.0, 12.0, 12.0, 12.0, 24.0, 24.0, 24.0, 36.0];
        for i in 0..8 {
            for j in 0..8 {
                let e = if i == j { expected[i] } else { 0.0 };
                assert!((r.stiffness[i][j] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constants_have_no_flux_and_no_jump_against_themselves() {
        let r = ReferenceBlocks::<f64>::new(BasisSet::dg_orthonormal(), 3).unwrap();
        for f in &r.faces {
            for s in 0..2 {
                for t in 0..2 {
                    for i in 0..8 {
                        assert_eq!(f.trace_flux[s][t][i][0], 0.0);
                    }
                }
            }
            // constant 1 on both sides has zero jump
            let sum: f64 = (0..2).map(|t| f.trace_trace[0][t][0][0]).sum();
            assert_eq!(sum, 0.0);
        }
    }
}
