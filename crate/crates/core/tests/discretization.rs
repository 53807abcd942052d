use std::f64::consts::PI;

use freezethaw::discretization::{
    assemble_elasticity, assemble_scalar, body_load, build_mesh, cell_strain, consistent_mass,
    divergence_load, elasticity_matrix, internal_force, nodal_divergence, robin_load, BandMatrix,
    Mesh, SpectralBasis1D,
};
use freezethaw::plasticity::Isotropic4;
use freezethaw::Error;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn unit_square(n: usize) -> Mesh {
    build_mesh(2, &[(0.0, 1.0), (0.0, 1.0)], &[n, n]).unwrap()
}

fn nodal(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    mesh.nodes().iter().map(|x| f(x[0], x[1])).collect()
}

fn vector_field(mesh: &Mesh, f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<f64> {
    let d = mesh.dim();
    let mut u = vec![0.0; d * mesh.num_nodes()];
    for (i, x) in mesh.nodes().iter().enumerate() {
        let v = f(x[0], x[1]);
        u[d * i..d * i + d].copy_from_slice(&v[..d]);
    }
    u
}

#[test]
fn build_mesh_examples() {
    let m = build_mesh(1, &[(-1.0, 3.0)], &[8]).unwrap();
    assert_eq!((m.num_nodes(), m.num_cells()), (9, 8));
    assert_eq!(m.nodes()[8][0], 3.0);
    assert_eq!(m.facets().iter().map(|f| f.marker).collect::<Vec<_>>(), [1, 2]);
    assert!((m.total_measure() - 4.0).abs() < 1e-15);

    let m = build_mesh(2, &[(0.0, 2.0), (0.0, 1.0)], &[4, 3]).unwrap();
    assert_eq!((m.num_nodes(), m.num_cells()), (20, 24));
    assert!((m.total_measure() - 2.0).abs() < 1e-14);
    let perimeter: f64 = (0..m.facets().len()).map(|k| m.facet_measure(k)).sum();
    assert!((perimeter - 6.0).abs() < 1e-14);
    let mut markers = m.markers();
    markers.sort();
    assert_eq!(markers, [1, 2, 3, 4]);

    assert!(matches!(build_mesh(3, &[(0.0, 1.0); 3], &[2; 3]), Err(Error::InvalidParameter(_))));
    assert!(build_mesh(1, &[(1.0, 0.0)], &[4]).is_err());
    assert!(build_mesh(1, &[(0.0, 1.0)], &[1]).is_err());
}

#[test]
fn scalar_forms_integrate_linear_fields() {
    // int |grad x|^2 = 1 on the unit interval and the unit square.
    for mesh in [build_mesh(1, &[(0.0, 1.0)], &[7]).unwrap(), unit_square(5)] {
        let coef = vec![1.0; mesh.num_cells()];
        let bc = vec![0.0; mesh.facets().len()];
        let forms = assemble_scalar(&mesh, &coef, &bc).unwrap();
        let p = nodal(&mesh, |x, _| x);
        assert!((0.5 * forms.energy(&p) - 0.5).abs() < 1e-13);
        // Constants sit in the kernel.
        let one = vec![1.0; mesh.num_nodes()];
        assert!(forms.stiffness.matvec(&one).iter().all(|v| v.abs() < 1e-12));
        // Consistent and lumped mass both integrate the constant exactly.
        assert!((forms.mass.quadratic(&one) - mesh.total_measure()).abs() < 1e-13);
        let lumped: f64 = forms.lumped_mass.iter().sum();
        assert!((lumped - mesh.total_measure()).abs() < 1e-13);
        // Consistent mass: int x^2 = 1/3 exactly for P1 x.
        assert!((consistent_mass(&mesh).quadratic(&p) - 1.0 / 3.0).abs() < 1e-13);
    }
}

#[test]
fn robin_terms_integrate_over_the_boundary() {
    let mesh = unit_square(4);
    let coef: Vec<f64> = mesh.facets().iter().map(|f| f.marker as f64).collect();
    // int_{boundary} alpha * 1 ds with alpha = marker: 1 + 2 + 3 + 4.
    let b = robin_load(&mesh, &coef, &|_, _| 1.0);
    assert!((b.iter().sum::<f64>() - 10.0).abs() < 1e-13);
    let forms = assemble_scalar(&mesh, &vec![1.0; mesh.num_cells()], &coef).unwrap();
    let one = vec![1.0; mesh.num_nodes()];
    assert!((forms.robin.quadratic(&one) - 10.0).abs() < 1e-13);
    assert!((forms.robin_lumped.iter().sum::<f64>() - 10.0).abs() < 1e-13);
    // Marker-dependent data: g = 2 on the top only.
    let b = robin_load(&mesh, &coef, &|_, m| if m == 3 { 2.0 } else { 0.0 });
    assert!((b.iter().sum::<f64>() - 6.0).abs() < 1e-13);
}

#[test]
fn elastic_energy_of_affine_fields() {
    let c = Isotropic4::new(1.3, 0.7).unwrap();
    let mesh = unit_square(3);
    let a = elasticity_matrix(&mesh, &c);
    // Stretch u = (x, 0): C eps : eps = K + 4G/3.
    let u = vector_field(&mesh, |x, _| [x, 0.0]);
    assert!((a.quadratic(&u) - (1.3 + 4.0 * 0.7 / 3.0)).abs() < 1e-13);
    // Simple shear u = (y, 0): eps_xy = 1/2, energy 2G |eps|^2 = G.
    let u = vector_field(&mesh, |_, y| [y, 0.0]);
    assert!((a.quadratic(&u) - 0.7).abs() < 1e-13);
    // Rigid motions carry no energy.
    for rigid in [vector_field(&mesh, |x, y| [-y, x]), vector_field(&mesh, |_, _| [1.0, -2.0])] {
        assert!(a.quadratic(&rigid).abs() < 1e-13);
    }
    // Strain and internal force agree with the matrix: F(C eps(u)) = A u.
    let u = vector_field(&mesh, |x, y| [x * y, x - y * y]);
    let stress: Vec<_> = (0..mesh.num_cells()).map(|k| c.apply(&cell_strain(&mesh, k, &u))).collect();
    let f = internal_force(&mesh, &stress);
    let au = a.matvec(&u);
    for (x, y) in f.iter().zip(&au) {
        assert!((x - y).abs() < 1e-13);
    }
    assert!(a.asymmetry() < 1e-14);
}

#[test]
fn korn_constant_matches_discrete_spectrum() {
    // P1 stiffness with lumped mass is the three-point Laplacian, whose first
    // Dirichlet eigenvalue is (4 / h^2) sin^2(pi h / 2).
    let n = 32;
    let mesh = build_mesh(1, &[(0.0, 1.0)], &[n]).unwrap();
    let c = Isotropic4::scalar(2.0).unwrap();
    let forms = assemble_elasticity(&mesh, &c, &[1, 2]).unwrap();
    let h = 1.0 / n as f64;
    let exact = c.uniaxial_modulus() * 4.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
    assert!((forms.coercivity - exact).abs() < 1e-8 * exact, "{} vs {exact}", forms.coercivity);

    // Without constraints rigid motions survive.
    let mesh = unit_square(3);
    assert!(matches!(
        assemble_elasticity(&mesh, &c, &[]),
        Err(Error::InvalidSetup(_))
    ));
    let forms = assemble_elasticity(&mesh, &c, &[4]).unwrap();
    assert!(forms.coercivity > 0.0);
}

#[test]
fn divergence_identities() {
    let mesh = unit_square(4);
    let u = vector_field(&mesh, |x, y| [x * x, 3.0 * y]);
    let forms = assemble_scalar(&mesh, &vec![1.0; mesh.num_cells()], &vec![0.0; mesh.facets().len()])
        .unwrap();
    let d = nodal_divergence(&mesh, &forms.lumped_mass, &u);
    // Lumped projection identity with a test field a.
    let a = nodal(&mesh, |x, y| 1.0 + x - 2.0 * y);
    let lhs: f64 = (0..mesh.num_nodes()).map(|i| forms.lumped_mass[i] * d[i] * a[i]).sum();
    let rhs: f64 = (0..mesh.num_cells())
        .map(|k| {
            let c = &mesh.cells()[k];
            let mean = c.iter().map(|i| a[*i]).sum::<f64>() / c.len() as f64;
            mesh.cell_measure(k) * cell_strain(&mesh, k, &u).trace() * mean
        })
        .sum();
    assert!((lhs - rhs).abs() < 1e-13);
    // divergence_load(w) . u = sum_e |e| w_e div_e u.
    let w: Vec<f64> = (0..mesh.num_cells()).map(|k| 0.5 + k as f64 * 0.01).collect();
    let b = divergence_load(&mesh, &w);
    let lhs: f64 = b.iter().zip(&u).map(|(x, y)| x * y).sum();
    let rhs: f64 = (0..mesh.num_cells())
        .map(|k| mesh.cell_measure(k) * w[k] * cell_strain(&mesh, k, &u).trace())
        .sum();
    assert!((lhs - rhs).abs() < 1e-13);
    // Body load of a constant gravity integrates to |Omega| g.
    let g = body_load(&mesh, &[0.0, -9.0]);
    let total: f64 = g.iter().skip(1).step_by(2).sum();
    assert!((total + 9.0).abs() < 1e-13);
}

#[test]
fn spectral_modes_are_orthonormal() {
    let mesh = build_mesh(1, &[(0.5, 2.5)], &[64]).unwrap();
    let basis = SpectralBasis1D::new(&mesh, 20).unwrap();
    assert_eq!(basis.len(), 21);
    assert_eq!(basis.length(), 2.0);
    for i in 0..basis.len() {
        let expected = (i as f64 * PI / 2.0).powi(2);
        assert!((basis.eigenvalues()[i] - expected).abs() < 1e-12);
        for j in 0..basis.len() {
            let ip = basis.inner(basis.mode(i), basis.mode(j));
            let kd = if i == j { 1.0 } else { 0.0 };
            assert!((ip - kd).abs() < 1e-12, "({i}, {j}): {ip}");
        }
    }
    let coef: Vec<f64> = (0..21).map(|i| 1.0 / (1.0 + i as f64)).collect();
    let back = basis.project(&basis.synthesize(&coef));
    for (a, b) in coef.iter().zip(&back) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(SpectralBasis1D::new(&mesh, 64).is_err());
    assert!(SpectralBasis1D::new(&unit_square(2), 1).is_err());
}

#[test]
fn mesh_text_round_trip() {
    for mesh in [build_mesh(1, &[(0.0, 1.0)], &[5]).unwrap(), unit_square(3)] {
        let back = Mesh::from_text(&mesh.to_text()).unwrap();
        assert_eq!(back, mesh);
    }
    let err = Mesh::from_text("dim 1\nnodes 2\n0\nx\n").unwrap_err();
    match err {
        Error::Parse { line, .. } => assert_eq!(line, 4),
        other => panic!("unexpected {other:?}"),
    }
}

proptest! {
    #[test]
    fn banded_lu_matches_dense_solver(
        n in 3usize..30,
        bw in 1usize..4,
        seed in prop::collection::vec(-1.0f64..1.0, 200),
        rhs in prop::collection::vec(-5.0f64..5.0, 30),
    ) {
        let bw = bw.min(n - 1);
        let mut a = BandMatrix::zeros(n, bw);
        let mut dense = DMatrix::<f64>::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i.saturating_sub(bw)..=(i + bw).min(n - 1) {
                let v = if i == j { 4.0 + 2.0 * bw as f64 } else { seed[k % seed.len()] };
                k += 1;
                a.add(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let b = &rhs[..n];
        let x = a.factor().unwrap().solve(b).unwrap();
        let y = dense.lu().solve(&DVector::from_column_slice(b)).unwrap();
        for i in 0..n {
            prop_assert!((x[i] - y[i]).abs() < 1e-10 * (1.0 + y[i].abs()));
        }
    }
}
