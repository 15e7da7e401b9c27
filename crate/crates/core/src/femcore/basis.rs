use super::quadrature::{quadrature_rule, QuadratureEntity};
use crate::Real;

pub const BASIS_SIZE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    CgTrilinear,
    DgOrthonormalQ1,
}

/// Eight trilinear functions on the reference cube `[0,1]^3`.
///
/// For the DG basis, row `i` of `coefficients` expands function `i` in the
/// centered monomials `1, x, y, z, xy, xz, yz, xyz` (with `x = ξ - 1/2` etc.)
/// and the basis is orthonormal under `(1/|E|) ∫_E`; in particular function 0
/// is the constant 1.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisSet<T> {
    pub kind: BasisKind,
    coefficients: [[T; BASIS_SIZE]; BASIS_SIZE],
}

pub type BasisValues<T> = ([T; BASIS_SIZE], [[T; 3]; BASIS_SIZE]);

impl<T: Real> BasisSet<T> {
    pub fn cg_trilinear() -> Self {
        Self { kind: BasisKind::CgTrilinear, coefficients: [[T::zero(); BASIS_SIZE]; BASIS_SIZE] }
    }

    pub fn dg_orthonormal() -> Self {
        orthonormalize_broken_basis()
    }

    pub fn len(&self) -> usize {
        BASIS_SIZE
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Monomial expansion coefficients (DG only; zero for CG).
    pub fn coefficients(&self) -> &[[T; BASIS_SIZE]; BASIS_SIZE] {
        &self.coefficients
    }

    /// Values and reference gradients at `xi`. Physical gradients on a cube
    /// of edge `h` are the reference gradients divided by `h`.
    pub fn eval(&self, xi: [T; 3]) -> BasisValues<T> {
        match self.kind {
            BasisKind::CgTrilinear => eval_nodal(xi),
            BasisKind::DgOrthonormalQ1 => {
                let (m, dm) = centered_monomials(xi);
                let mut v = [T::zero(); BASIS_SIZE];
                let mut g = [[T::zero(); 3]; BASIS_SIZE];
                for i in 0..BASIS_SIZE {
                    for j in 0..BASIS_SIZE {
                        let c = self.coefficients[i][j];
                        if c != T::zero() {
                            v[i] += c * m[j];
                            for d in 0..3 {
                                g[i][d] += c * dm[j][d];
                            }
                        }
                    }
                }
                (v, g)
            }
        }
    }

    /// Values only.
    pub fn values(&self, xi: [T; 3]) -> [T; BASIS_SIZE] {
        self.eval(xi).0
    }
}

fn eval_nodal<T: Real>(xi: [T; 3]) -> BasisValues<T> {
    let one = T::one();
    let f = |a: usize, x: T| if a == 1 { x } else { one - x };
    let df = |a: usize| if a == 1 { one } else { -one };
    let mut v = [T::zero(); BASIS_SIZE];
    let mut g = [[T::zero(); 3]; BASIS_SIZE];
    for n in 0..BASIS_SIZE {
        let (a, b, c) = (n & 1, (n >> 1) & 1, (n >> 2) & 1);
        let (fx, fy, fz) = (f(a, xi[0]), f(b, xi[1]), f(c, xi[2]));
        v[n] = fx * fy * fz;
        g[n] = [df(a) * fy * fz, fx * df(b) * fz, fx * fy * df(c)];
    }
    (v, g)
}

fn centered_monomials<T: Real>(xi: [T; 3]) -> BasisValues<T> {
    let h = T::lit(0.5);
    let (x, y, z) = (xi[0] - h, xi[1] - h, xi[2] - h);
    let (o, n) = (T::one(), T::zero());
    let m = [o, x, y, z, x * y, x * z, y * z, x * y * z];
    let dm = [
        [n, n, n],
        [o, n, n],
        [n, o, n],
        [n, n, o],
        [y, x, n],
        [z, n, x],
        [n, z, y],
        [y * z, x * z, x * y],
    ];
    (m, dm)
}

/// Gram-Schmidt on the centered Q1 monomials under the reference-cell L2
/// inner product, integrated exactly with the 3-point tensor rule.
pub fn orthonormalize_broken_basis<T: Real>() -> BasisSet<T> {
    let rule = quadrature_rule::<f64>(QuadratureEntity::Cell, 5).expect("supported degree");
    let samples: Vec<[f64; BASIS_SIZE]> = rule.points.iter().map(|&p| centered_monomials(p).0).collect();
    let inner = |a: &[f64; BASIS_SIZE], b: &[f64; BASIS_SIZE]| -> f64 {
        samples
            .iter()
            .zip(&rule.weights)
            .map(|(m, w)| {
                let va: f64 = a.iter().zip(m).map(|(c, x)| c * x).sum();
                let vb: f64 = b.iter().zip(m).map(|(c, x)| c * x).sum();
                w * va * vb
            })
            .sum()
    };
    let mut basis: Vec<[f64; BASIS_SIZE]> = Vec::with_capacity(BASIS_SIZE);
    for k in 0..BASIS_SIZE {
        let mut v = [0.0; BASIS_SIZE];
        v[k] = 1.0;
        for q in &basis {
            let proj = inner(&v, q);
            for j in 0..BASIS_SIZE {
                v[j] -= proj * q[j];
            }
        }
        let norm = inner(&v, &v).sqrt();
        for c in v.iter_mut() {
            *c /= norm;
            // the centered monomials are already mutually orthogonal; drop
            // projection roundoff so the expansion stays exactly diagonal
            if c.abs() < 1e-13 {
                *c = 0.0;
            }
        }
        basis.push(v);
    }
    let mut coefficients = [[T::zero(); BASIS_SIZE]; BASIS_SIZE];
    for (i, row) in basis.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            coefficients[i][j] = T::lit(c);
        }
    }
    BasisSet { kind: BasisKind::DgOrthonormalQ1, coefficients }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexmesh::LOCAL_VERTEX_OFFSETS;

    fn gram(b: &BasisSet<f64>) -> [[f64; 8]; 8] {
        let rule = quadrature_rule::<f64>(QuadratureEntity::Cell, 3).unwrap();
        let mut g = [[0.0; 8]; 8];
        for (p, w) in rule.iter() {
            let v = b.values(p);
            for i in 0..8 {
                for j in 0..8 {
                    g[i][j] += w * v[i] * v[j];
                }
            }
        }
        g
    }

    #[test]
    fn nodal_kronecker_at_vertices() {
        let b = BasisSet::<f64>::cg_trilinear();
        for (n, off) in LOCAL_VERTEX_OFFSETS.iter().enumerate() {
            let v = b.values([off[0] as f64, off[1] as f64, off[2] as f64]);
            for (m, &val) in v.iter().enumerate() {
                assert_eq!(val, if m == n { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn nodal_partition_of_unity() {
        let b = BasisSet::<f64>::cg_trilinear();
        for p in [[0.1, 0.7, 0.3], [0.5, 0.5, 0.5], [1.0, 0.0, 0.25]] {
            let (v, g) = b.eval(p);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            for d in 0..3 {
                assert!(g.iter().map(|gi| gi[d]).sum::<f64>().abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dg_gram_is_identity() {
        let g = gram(&BasisSet::dg_orthonormal());
        for i in 0..8 {
            for j in 0..8 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g[i][j] - e).abs() < 1e-12, "{i} {j}: {}", g[i][j]);
            }
        }
    }

    #[test]
    fn dg_first_function_is_constant_with_zero_gradient() {
        let b = BasisSet::<f64>::dg_orthonormal();
        for p in [[0.0, 0.0, 0.0], [0.3, 0.9, 0.1]] {
            let (v, g) = b.eval(p);
            assert!((v[0] - 1.0).abs() < 1e-15);
            assert_eq!(g[0], [0.0; 3]);
        }
    }

    #[test]
    fn dg_is_scaled_tensor_legendre() {
        let b = BasisSet::<f64>::dg_orthonormal();
        let s = 12f64.sqrt();
        let expected = [1.0, s, s, s, 12.0, 12.0, 12.0, 12.0 * s];
        for i in 0..8 {
            for j in 0..8 {
                let e = if i == j { expected[i] } else { 0.0 };
                assert!((b.coefficients()[i][j] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_precision_gram() {
        let b = BasisSet::<f32>::dg_orthonormal();
        let rule = quadrature_rule::<f32>(QuadratureEntity::Cell, 3).unwrap();
        let mut g = [[0.0f32; 8]; 8];
        for (p, w) in rule.iter() {
            let v = b.values(p);
            for i in 0..8 {
                for j in 0..8 {
                    g[i][j] += w * v[i] * v[j];
                }
            }
        }
        for i in 0..8 {
            assert!((g[i][i] - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn linear_field_gradients_are_exact() {
        let grad = [0.7, -1.3, 2.1];
        let h = 2.0;
        let origin = [1.0, -3.0, 0.5];
        let field = |x: [f64; 3]| 0.4 + grad[0] * x[0] + grad[1] * x[1] + grad[2] * x[2];
        let to_phys = |xi: [f64; 3]| [origin[0] + h * xi[0], origin[1] + h * xi[1], origin[2] + h * xi[2]];

        // nodal interpolation
        let cg = BasisSet::<f64>::cg_trilinear();
        let cg_coef: Vec<f64> = LOCAL_VERTEX_OFFSETS
            .iter()
            .map(|o| field(to_phys([o[0] as f64, o[1] as f64, o[2] as f64])))
            .collect();

        // L2 projection (orthonormal: coefficient = cell mean of field * phi)
        let dg = BasisSet::<f64>::dg_orthonormal();
        let rule = quadrature_rule::<f64>(QuadratureEntity::Cell, 3).unwrap();
        let mut dg_coef = [0.0; 8];
        for (p, w) in rule.iter() {
            let v = dg.values(p);
            for i in 0..8 {
                dg_coef[i] += w * field(to_phys(p)) * v[i];
            }
        }

        for (p, _) in rule.iter() {
            for (b, coef) in [(&cg, &cg_coef[..]), (&dg, &dg_coef[..])] {
                let (_, g) = b.eval(p);
                for d in 0..3 {
                    let val: f64 = (0..8).map(|i| coef[i] * g[i][d] / h).sum();
                    assert!((val - grad[d]).abs() < 1e-12, "{:?}: {val} vs {}", b.kind, grad[d]);
                }
            }
        }
    }
}
