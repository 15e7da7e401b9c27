use dgeeg::analytic::Dipole;
use dgeeg::hexmesh::{compute_skeleton, HexMesh};
use dgeeg::schemes::{
    assemble_operator_cg, assemble_operator_dg, assemble_rhs_cg, assemble_rhs_dg, source_conductivity,
    ConductivityField, DgParameters, PenaltyScaling, RhsOptions,
};
use dgeeg::sparse::CsrMatrix;
use nalgebra::{DMatrix, SymmetricEigen};

fn two_material_cube(n: usize) -> (HexMesh, ConductivityField<f64>) {
    let mut labels = Vec::new();
    for i in 0..n {
        for _ in 0..n * n {
            labels.push(if i < n / 2 { 1 } else { 2 });
        }
    }
    let mesh = HexMesh::from_lattice([-(n as f64); 3], 2.0, [n, n, n], &labels).unwrap();
    let sigma = mesh.cell_labels().iter().map(|&l| if l == 1 { 0.33 } else { 0.01 }).collect();
    let field = ConductivityField::from_values(&mesh, sigma);
    (mesh, field)
}

fn dense(a: &CsrMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = DMatrix::zeros(n, n);
    for r in 0..n {
        let (c, v) = a.row(r);
        for (&c, &v) in c.iter().zip(v) {
            m[(r, c as usize)] = v;
        }
    }
    m
}

/// Eigenvalues sorted ascending.
fn spectrum(a: &CsrMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(dense(a)).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

#[test]
fn dg_operator_is_symmetric_with_constant_kernel() {
    let (mesh, field) = two_material_cube(4);
    let sk = compute_skeleton(&mesh);
    let a = assemble_operator_dg(&mesh, &sk, &field, &DgParameters::default()).unwrap();
    assert_eq!(a.nrows(), 8 * 64);
    assert!(a.symmetry_defect() <= 1e-12 * a.max_abs());
    let ones = dgeeg::schemes::DofLayout::Dg { num_cells: 64 }.constant_mode::<f64>();
    let r = a.mul_vec(&ones);
    let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(norm <= 1e-12 * a.frobenius_norm(), "{norm}");
}

#[test]
fn dg_sparsity_follows_face_adjacency() {
    let (mesh, field) = two_material_cube(4);
    let sk = compute_skeleton(&mesh);
    let a = assemble_operator_dg(&mesh, &sk, &field, &DgParameters::default()).unwrap();
    for r in 0..a.nrows() {
        let cell = r / 8;
        let (cols, _) = a.row(r);
        assert!(cols.len() <= 16, "row {r} has {} entries", cols.len());
        for &c in cols {
            let other = c as usize / 8;
            let adjacent = other == cell || (0..6).any(|f| mesh.neighbor(cell, f) == Some(other));
            assert!(adjacent, "row {r} couples non-adjacent cells");
        }
    }
}

#[test]
fn dg_penalty_threshold() {
    let (mesh, field) = two_material_cube(4);
    let sk = compute_skeleton(&mesh);
    let smallest_nontrivial = |params: DgParameters<f64>| {
        let a = assemble_operator_dg(&mesh, &sk, &field, &params).unwrap();
        let ev = spectrum(&a);
        let scale = ev.last().unwrap().abs();
        (ev[0] / scale, ev[1] / scale)
    };
    let (kernel, lambda) = smallest_nontrivial(DgParameters::default());
    assert!(kernel.abs() < 1e-12);
    assert!(lambda > 1e-8, "deflated spectrum not positive: {lambda}");
    // without the degree factor the same eta is below the trace-inequality bound
    let (lowest, _) = smallest_nontrivial(DgParameters { eta: 0.39, penalty_scaling: PenaltyScaling::Unit });
    assert!(lowest < -1e-8, "{lowest}");
    let (lowest, _) = smallest_nontrivial(DgParameters::with_eta(0.0));
    assert!(lowest < -1e-8);
}

#[test]
fn cg_operator_properties() {
    let (mesh, field) = two_material_cube(4);
    let a = assemble_operator_cg(&mesh, &field).unwrap();
    assert_eq!(a.nrows(), 125);
    assert!(a.symmetry_defect() <= 1e-14 * a.max_abs());
    for r in 0..a.nrows() {
        let s: f64 = a.row(r).1.iter().sum();
        assert!(s.abs() < 1e-14 * a.max_abs());
    }
    let ev = spectrum(&a);
    assert!(ev[0].abs() < 1e-12 * ev.last().unwrap());
    assert!(ev[1] > 0.0);
    let doubled = ConductivityField::from_values(&mesh, field.values().iter().map(|s| 2.0 * s).collect());
    let b = assemble_operator_cg(&mesh, &doubled).unwrap();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert_eq!(2.0 * x, *y);
    }
}

#[test]
fn rhs_is_compatible_and_linear() {
    let (mesh, field) = two_material_cube(4);
    let sk = compute_skeleton(&mesh);
    let d = Dipole::new([-2.3, 0.4, 1.1], [0.3, -0.5, 0.8]).unwrap();
    let split = source_conductivity(&mesh, &field, &d).unwrap();
    assert_eq!(split.sigma_inf, 0.33);
    let opts = RhsOptions::default();
    for scheme in ["cg", "dg"] {
        let assemble = |dip: &Dipole<f64>| {
            if scheme == "cg" {
                assemble_rhs_cg(&mesh, &sk, &field, &split, dip, &opts).unwrap().values
            } else {
                assemble_rhs_dg(&mesh, &sk, &field, &split, dip, &opts).unwrap().values
            }
        };
        let b = assemble(&d);
        let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let step = if scheme == "cg" { 1 } else { 8 };
        let sum: f64 = b.iter().step_by(step).sum();
        assert!(sum.abs() <= 1e-10 * norm, "{scheme}: {sum} vs {norm}");
        let neg = assemble(&d.scaled(-1.0));
        assert!(b.iter().zip(&neg).all(|(x, y)| *x == -*y));
        let d2 = Dipole::new(d.position, [1.0, 0.2, -0.1]).unwrap();
        let d12 = Dipole::new(d.position, [1.3, -0.3, 0.7]).unwrap();
        let (b2, b12) = (assemble(&d2), assemble(&d12));
        for i in 0..b.len() {
            assert!((b[i] + b2[i] - b12[i]).abs() <= 1e-12 * norm);
        }
    }
}

#[test]
fn homogeneous_rhs_is_boundary_only() {
    let mesh = HexMesh::from_lattice([-4.0; 3], 2.0, [4, 4, 4], &[1; 64]).unwrap();
    let sk = compute_skeleton(&mesh);
    let field = ConductivityField::from_values(&mesh, vec![0.33; 64]);
    let d = Dipole::new([0.3, 0.1, -0.2], [0.0, 0.0, 1.0]).unwrap();
    let split = source_conductivity(&mesh, &field, &d).unwrap();
    let b = assemble_rhs_dg(&mesh, &sk, &field, &split, &d, &RhsOptions::default()).unwrap().values;
    // interior cells of a 4^3 block have no boundary face
    let interior = mesh.cell_at(1, 1, 1).unwrap();
    assert!(b[8 * interior..8 * interior + 8].iter().all(|&v| v == 0.0));
    let boundary_cell = mesh.cell_at(0, 0, 0).unwrap();
    assert!(b[8 * boundary_cell] != 0.0);
}

/// Two-point Gauss rule on [0, 1].
const GAUSS2: [(f64, f64); 2] = [(0.5 - 0.288_675_134_594_812_9, 0.5), (0.5 + 0.288_675_134_594_812_9, 0.5)];

#[test]
fn dg_is_exact_for_flux_continuous_piecewise_linear_fields() {
    use dgeeg::femcore::BasisSet;
    use dgeeg::hexmesh::{face_outward_normal, face_to_reference};

    let (mesh, field) = two_material_cube(4);
    let sk = compute_skeleton(&mesh);
    let (sl, sr) = (0.33, 0.01);
    let g = [0.7, -0.4, 0.25];
    // left of x = 0 the gradient is g, right of it the normal part is scaled
    let grad = |x: f64| if x < 0.0 { g } else { [sl / sr * g[0], g[1], g[2]] };
    let basis = BasisSet::<f64>::dg_orthonormal();
    let h = mesh.cell_edge_mm();
    let n = mesh.num_cells();
    let mut c = vec![0.0; 8 * n];
    let mut b = vec![0.0; 8 * n];
    for cell in 0..n {
        let o = mesh.cell_origin(cell);
        let mid = mesh.cell_centroid(cell)[0];
        // local L2 projection
        let mut mass = DMatrix::<f64>::zeros(8, 8);
        let mut r = nalgebra::DVector::<f64>::zeros(8);
        for &(a, wa) in &GAUSS2 {
            for &(bq, wb) in &GAUSS2 {
                for &(cq, wc) in &GAUSS2 {
                    let xi = [a, bq, cq];
                    let phi = basis.values(xi);
                    let x = [o[0] + h * a, o[1] + h * bq, o[2] + h * cq];
                    let gr = grad(mid);
                    let ux = gr[0] * x[0] + gr[1] * x[1] + gr[2] * x[2];
                    for i in 0..8 {
                        r[i] += wa * wb * wc * ux * phi[i];
                        for j in 0..8 {
                            mass[(i, j)] += wa * wb * wc * phi[i] * phi[j];
                        }
                    }
                }
            }
        }
        let local = mass.lu().solve(&r).unwrap();
        c[8 * cell..8 * cell + 8].copy_from_slice(local.as_slice());
        // Neumann load on outer faces
        let sigma = field.sigma(cell);
        for face in 0..6u8 {
            if mesh.neighbor(cell, face).is_some() {
                continue;
            }
            let nrm = face_outward_normal(face);
            let gr = grad(mid);
            let flux = sigma * (gr[0] * nrm[0] + gr[1] * nrm[1] + gr[2] * nrm[2]);
            for &(s, ws) in &GAUSS2 {
                for &(t, wt) in &GAUSS2 {
                    let phi = basis.values(face_to_reference(face, s, t));
                    for i in 0..8 {
                        b[8 * cell + i] += h * h * ws * wt * flux * phi[i];
                    }
                }
            }
        }
    }
    let a = assemble_operator_dg(&mesh, &sk, &field, &DgParameters::default()).unwrap();
    let ac = a.mul_vec(&c);
    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let err = ac.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-12 * scale, "{err:e} vs {scale:e}");
}
