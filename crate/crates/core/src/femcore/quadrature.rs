use super::FemError;
use crate::Real;

/// Highest polynomial degree a rule can be requested for.
pub const MAX_DEGREE: usize = 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureEntity {
    Cell,
    Face,
}

/// Tensor Gauss-Legendre rule on `[0,1]^3` (cells) or `[0,1]^2` (faces).
///
/// Face points carry their two plane coordinates in the first two slots
/// and zero in the third; map them with [`crate::hexmesh`]'s
/// `face_to_reference`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<T> {
    pub entity: QuadratureEntity,
    pub degree: usize,
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([T; 3], T)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// `n`-point Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Tensor rule exact for polynomials of degree `degree` in each variable.
pub fn quadrature_rule<T: Real>(entity: QuadratureEntity, degree: usize) -> Result<QuadratureRule<T>, FemError> {
    if degree == 0 || degree > MAX_DEGREE {
        return Err(FemError::UnsupportedDegree(degree));
    }
    let n = (degree + 2) / 2;
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match entity {
        QuadratureEntity::Cell => {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        points.push([T::lit(x[i]), T::lit(x[j]), T::lit(x[k])]);
                        weights.push(T::lit(w[i] * w[j] * w[k]));
                    }
                }
            }
        }
        QuadratureEntity::Face => {
            for i in 0..n {
                for j in 0..n {
                    points.push([T::lit(x[i]), T::lit(x[j]), T::zero()]);
                    weights.push(T::lit(w[i] * w[j]));
                }
            }
        }
    }
    Ok(QuadratureRule { entity, degree, points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn point_counts_and_weight_sums() {
        let r: QuadratureRule<f64> = quadrature_rule(QuadratureEntity::Cell, 3).unwrap();
        assert_eq!(r.len(), 8);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let r: QuadratureRule<f64> = quadrature_rule(QuadratureEntity::Cell, 5).unwrap();
        assert_eq!(r.len(), 27);
        let f: QuadratureRule<f64> = quadrature_rule(QuadratureEntity::Face, 3).unwrap();
        assert_eq!(f.len(), 4);
        assert!((f.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(f.points.iter().all(|p| p[2] == 0.0));
    }

    #[test]
    fn x2y2_integral() {
        let r: QuadratureRule<f64> = quadrature_rule(QuadratureEntity::Cell, 4).unwrap();
        let v: f64 = r.iter().map(|(p, w)| w * p[0] * p[0] * p[1] * p[1]).sum();
        assert!((v - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn unsupported_degrees() {
        assert_eq!(quadrature_rule::<f64>(QuadratureEntity::Cell, 14), Err(FemError::UnsupportedDegree(14)));
        assert_eq!(quadrature_rule::<f64>(QuadratureEntity::Face, 0), Err(FemError::UnsupportedDegree(0)));
        assert!(quadrature_rule::<f64>(QuadratureEntity::Face, 13).is_ok());
    }

    #[test]
    fn nodes_symmetric_and_sorted() {
        for n in 1..=7 {
            let (x, w) = gauss_legendre(n);
            for i in 0..n {
                assert!((x[i] + x[n - 1 - i] - 1.0).abs() < 1e-15);
                assert!(w[i] > 0.0);
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    proptest! {
        #[test]
        fn tensor_monomials_exact(degree in 1usize..=13, a in 0u32..=13, b in 0u32..=13, c in 0u32..=13) {
            prop_assume!(a as usize <= degree && b as usize <= degree && c as usize <= degree);
            let r: QuadratureRule<f64> = quadrature_rule(QuadratureEntity::Cell, degree).unwrap();
            let v: f64 = r.iter().map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32)).sum();
            let exact = 1.0 / ((a + 1) * (b + 1) * (c + 1)) as f64;
            prop_assert!((v - exact).abs() < 1e-14);
        }

        #[test]
        fn face_monomials_exact(degree in 1usize..=13, a in 0u32..=13, b in 0u32..=13) {
            prop_assume!(a as usize <= degree && b as usize <= degree);
            let r: QuadratureRule<f64> = quadrature_rule(QuadratureEntity::Face, degree).unwrap();
            let v: f64 = r.iter().map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum();
            prop_assert!((v - 1.0 / ((a + 1) * (b + 1)) as f64).abs() < 1e-14);
        }
    }
}
