//! Assembly of P1 finite-element forms.

use super::banded::BandMatrix;
use super::mesh::Mesh;
use crate::error::{invalid_param, Error, Result};
use crate::plasticity::{Isotropic4, SymTensor};

/// Nodal lumped volumes: each cell gives an equal share to its vertices.
pub fn lumped_mass(mesh: &Mesh) -> Vec<f64> {
    let mut m = vec![0.0; mesh.num_nodes()];
    for (k, c) in mesh.cells().iter().enumerate() {
        let share = mesh.cell_measure(k) / c.len() as f64;
        for &i in c {
            m[i] += share;
        }
    }
    m
}

/// Consistent P1 mass matrix.
pub fn consistent_mass(mesh: &Mesh) -> BandMatrix {
    let mut a = BandMatrix::zeros(mesh.num_nodes(), mesh.node_bandwidth());
    for (k, c) in mesh.cells().iter().enumerate() {
        let m = mesh.cell_measure(k);
        let (diag, off) = if mesh.dim() == 1 {
            (m / 3.0, m / 6.0)
        } else {
            (m / 6.0, m / 12.0)
        };
        for &i in c {
            for &j in c {
                a.add(i, j, if i == j { diag } else { off });
            }
        }
    }
    a
}

/// Stiffness `sum_e coef_e |e| grad phi_i . grad phi_j`.
pub fn stiffness(mesh: &Mesh, coef: &[f64]) -> Result<BandMatrix> {
    if coef.len() != mesh.num_cells() {
        return Err(invalid_param("one stiffness coefficient per cell expected"));
    }
    if let Some((k, c)) = coef.iter().enumerate().find(|(_, c)| !(**c > 0.0)) {
        return Err(invalid_param(format!("stiffness coefficient {c} on cell {k} is not positive")));
    }
    let mut a = BandMatrix::zeros(mesh.num_nodes(), mesh.node_bandwidth());
    for (k, c) in mesh.cells().iter().enumerate() {
        let g = mesh.cell_gradients(k);
        let w = coef[k] * mesh.cell_measure(k);
        for (p, &i) in c.iter().enumerate() {
            for (q, &j) in c.iter().enumerate() {
                a.add(i, j, w * (g[p][0] * g[q][0] + g[p][1] * g[q][1]));
            }
        }
    }
    Ok(a)
}

/// Lumped boundary weights `sum_f coef_f |f| / #nodes(f)` per node.
pub fn boundary_weights(mesh: &Mesh, facet_coef: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; mesh.num_nodes()];
    for (k, f) in mesh.facets().iter().enumerate() {
        let share = facet_coef[k] * mesh.facet_measure(k) / f.nodes.len() as f64;
        for &i in &f.nodes {
            w[i] += share;
        }
    }
    w
}

/// Consistent boundary mass `int coef phi_i phi_j ds`.
pub fn robin_matrix(mesh: &Mesh, facet_coef: &[f64]) -> BandMatrix {
    let mut a = BandMatrix::zeros(mesh.num_nodes(), mesh.node_bandwidth());
    for (k, f) in mesh.facets().iter().enumerate() {
        let c = facet_coef[k];
        if mesh.dim() == 1 {
            a.add(f.nodes[0], f.nodes[0], c);
        } else {
            let l = mesh.facet_measure(k) * c;
            let (i, j) = (f.nodes[0], f.nodes[1]);
            a.add(i, i, l / 3.0);
            a.add(j, j, l / 3.0);
            a.add(i, j, l / 6.0);
            a.add(j, i, l / 6.0);
        }
    }
    a
}

/// Robin load `int coef g phi_i ds` with `g` sampled at the facet nodes.
pub fn robin_load(mesh: &Mesh, facet_coef: &[f64], data: &dyn Fn([f64; 2], u32) -> f64) -> Vec<f64> {
    let mut b = vec![0.0; mesh.num_nodes()];
    for (k, f) in mesh.facets().iter().enumerate() {
        if facet_coef[k] == 0.0 {
            continue;
        }
        let share = facet_coef[k] * mesh.facet_measure(k) / f.nodes.len() as f64;
        for &i in &f.nodes {
            b[i] += share * data(mesh.nodes()[i], f.marker);
        }
    }
    b
}

/// Scalar diffusion forms with a Robin boundary part.
#[derive(Debug, Clone)]
pub struct ScalarForms {
    pub mass: BandMatrix,
    pub lumped_mass: Vec<f64>,
    pub stiffness: BandMatrix,
    pub robin: BandMatrix,
    pub robin_lumped: Vec<f64>,
}

impl ScalarForms {
    /// `p^T (K + R) p`, twice the energy of the assembled operator.
    pub fn energy(&self, p: &[f64]) -> f64 {
        self.stiffness.quadratic(p) + self.robin.quadratic(p)
    }
}

pub fn assemble_scalar(mesh: &Mesh, coef: &[f64], boundary_coef: &[f64]) -> Result<ScalarForms> {
    if boundary_coef.len() != mesh.facets().len() {
        return Err(invalid_param("one boundary coefficient per facet expected"));
    }
    if boundary_coef.iter().any(|c| !(*c >= 0.0)) {
        return Err(invalid_param("boundary coefficients must be nonnegative"));
    }
    Ok(ScalarForms {
        mass: consistent_mass(mesh),
        lumped_mass: lumped_mass(mesh),
        stiffness: stiffness(mesh, coef)?,
        robin: robin_matrix(mesh, boundary_coef),
        robin_lumped: boundary_weights(mesh, boundary_coef),
    })
}

/// Symmetric gradient of the vector hat function of local node `a`,
/// component `comp`, on cell `k`.
fn basis_strain(mesh: &Mesh, k: usize, a: usize, comp: usize) -> SymTensor {
    let g = mesh.cell_gradients(k)[a];
    if mesh.dim() == 1 {
        SymTensor::uniaxial(g[0])
    } else if comp == 0 {
        SymTensor::plane(g[0], 0.0, 0.5 * g[1])
    } else {
        SymTensor::plane(0.0, g[1], 0.5 * g[0])
    }
}

/// Strain of the displacement field `u` (interleaved components) on cell `k`.
pub fn cell_strain(mesh: &Mesh, k: usize, u: &[f64]) -> SymTensor {
    let d = mesh.dim();
    let g = mesh.cell_gradients(k);
    let c = &mesh.cells()[k];
    if d == 1 {
        SymTensor::uniaxial(u[c[0]] * g[0][0] + u[c[1]] * g[1][0])
    } else {
        let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
        for (a, &i) in c.iter().enumerate() {
            let (ux, uy) = (u[2 * i], u[2 * i + 1]);
            xx += ux * g[a][0];
            yy += uy * g[a][1];
            xy += 0.5 * (ux * g[a][1] + uy * g[a][0]);
        }
        SymTensor::plane(xx, yy, xy)
    }
}

/// `F_A = sum_e |e| sigma_e : eps(phi_A)`.
pub fn internal_force(mesh: &Mesh, stress: &[SymTensor]) -> Vec<f64> {
    let d = mesh.dim();
    let mut f = vec![0.0; d * mesh.num_nodes()];
    for (k, c) in mesh.cells().iter().enumerate() {
        let m = mesh.cell_measure(k);
        for (a, &i) in c.iter().enumerate() {
            for comp in 0..d {
                f[d * i + comp] += m * stress[k].dot(&basis_strain(mesh, k, a, comp));
            }
        }
    }
    f
}

/// `b_A = sum_e |e| w_e div phi_A`.
pub fn divergence_load(mesh: &Mesh, w: &[f64]) -> Vec<f64> {
    let d = mesh.dim();
    let mut b = vec![0.0; d * mesh.num_nodes()];
    for (k, c) in mesh.cells().iter().enumerate() {
        let m = mesh.cell_measure(k) * w[k];
        let g = mesh.cell_gradients(k);
        for (a, &i) in c.iter().enumerate() {
            for comp in 0..d {
                b[d * i + comp] += m * g[a][comp];
            }
        }
    }
    b
}

/// Lumped body force `m_i g`.
pub fn body_load(mesh: &Mesh, g: &[f64]) -> Vec<f64> {
    let d = mesh.dim();
    let m = lumped_mass(mesh);
    let mut b = vec![0.0; d * mesh.num_nodes()];
    for (i, mi) in m.iter().enumerate() {
        for comp in 0..d {
            b[d * i + comp] = mi * g.get(comp).copied().unwrap_or(0.0);
        }
    }
    b
}

/// Nodal divergence by lumped projection of the cellwise divergence.
///
/// With these weights `sum_i m_i d_i a_i = sum_e |e| div_e mean_e(a)` for
/// any nodal field `a`.
pub fn nodal_divergence(mesh: &Mesh, lumped: &[f64], u: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; mesh.num_nodes()];
    for (k, c) in mesh.cells().iter().enumerate() {
        let share = mesh.cell_measure(k) * cell_strain(mesh, k, u).trace() / c.len() as f64;
        for &i in c {
            d[i] += share;
        }
    }
    for (x, m) in d.iter_mut().zip(lumped) {
        *x /= m;
    }
    d
}

/// Elasticity operator with homogeneous Dirichlet constraints.
#[derive(Debug, Clone)]
pub struct ElasticForms {
    /// Unconstrained operator `int C eps(u) : eps(v)`.
    pub matrix: BandMatrix,
    /// Same operator with identity rows and columns at fixed dofs.
    pub constrained: BandMatrix,
    pub fixed: Vec<bool>,
    /// Smallest generalized eigenvalue against the lumped mass on free dofs.
    pub coercivity: f64,
}

impl ElasticForms {
    /// Replaces a matrix by its constrained version (identity on fixed dofs).
    pub fn constrain(&self, a: &mut BandMatrix) {
        let n = a.size();
        let bw = a.bandwidth();
        for (i, fixed) in self.fixed.iter().enumerate() {
            if *fixed {
                for j in i.saturating_sub(bw)..=(i + bw).min(n - 1) {
                    a.set(i, j, 0.0);
                    a.set(j, i, 0.0);
                }
                a.set(i, i, 1.0);
            }
        }
    }

    pub fn zero_fixed(&self, v: &mut [f64]) {
        for (x, fixed) in v.iter_mut().zip(&self.fixed) {
            if *fixed {
                *x = 0.0;
            }
        }
    }
}

/// Unconstrained elasticity matrix for an isotropic tensor.
pub fn elasticity_matrix(mesh: &Mesh, c: &Isotropic4) -> BandMatrix {
    let d = mesh.dim();
    let mut a = BandMatrix::zeros(d * mesh.num_nodes(), d * (mesh.node_bandwidth() + 1) - 1);
    for (k, cell) in mesh.cells().iter().enumerate() {
        let m = mesh.cell_measure(k);
        for (p, &i) in cell.iter().enumerate() {
            for ci in 0..d {
                let s = c.apply(&basis_strain(mesh, k, p, ci));
                for (q, &j) in cell.iter().enumerate() {
                    for cj in 0..d {
                        a.add(d * i + ci, d * j + cj, m * s.dot(&basis_strain(mesh, k, q, cj)));
                    }
                }
            }
        }
    }
    a
}

/// Elasticity forms with `u = 0` on facets carrying one of `dirichlet` markers.
///
/// Fails with an invalid-setup error when the constrained operator is not
/// coercive, i.e. when rigid motions survive the constraints.
pub fn assemble_elasticity(mesh: &Mesh, c: &Isotropic4, dirichlet: &[u32]) -> Result<ElasticForms> {
    let d = mesh.dim();
    let matrix = elasticity_matrix(mesh, c);
    let on = mesh.marked_nodes(dirichlet);
    let fixed: Vec<bool> = (0..d * mesh.num_nodes()).map(|k| on[k / d]).collect();
    let mut forms = ElasticForms {
        constrained: matrix.clone(),
        matrix,
        fixed,
        coercivity: 0.0,
    };
    let mut constrained = forms.matrix.clone();
    forms.constrain(&mut constrained);
    forms.constrained = constrained;
    if forms.fixed.iter().all(|f| *f) {
        forms.coercivity = f64::INFINITY;
        return Ok(forms);
    }
    let lumped = lumped_mass(mesh);
    let mass: Vec<f64> = (0..d * mesh.num_nodes()).map(|k| lumped[k / d]).collect();
    let lambda = smallest_eigenvalue(&forms, &mass).map_err(|_| {
        Error::InvalidSetup("elasticity operator is singular: rigid motions are not constrained".into())
    })?;
    let scale = c.max_eigenvalue() / mesh.total_measure().powf(2.0 / d as f64);
    if !(lambda > 1e-8 * scale) {
        return Err(Error::InvalidSetup(format!(
            "elasticity operator is not coercive on the constrained space (eigenvalue {lambda:e})"
        )));
    }
    forms.coercivity = lambda;
    Ok(forms)
}

/// Inverse iteration for the smallest eigenvalue of `K x = lambda M x` on free dofs.
fn smallest_eigenvalue(forms: &ElasticForms, mass: &[f64]) -> Result<f64> {
    let lu = forms.constrained.clone().factor()?;
    let n = mass.len();
    let mut x: Vec<f64> = (0..n)
        .map(|i| if forms.fixed[i] { 0.0 } else { 1.0 + 0.1 * ((i * 7919) % 13) as f64 })
        .collect();
    let mut lambda = 0.0;
    for _ in 0..200 {
        let mut rhs: Vec<f64> = x.iter().zip(mass).map(|(a, m)| a * m).collect();
        forms.zero_fixed(&mut rhs);
        let y = lu.solve(&rhs)?;
        let ky = forms.constrained.matvec(&y);
        let num: f64 = ky.iter().zip(&y).zip(&forms.fixed).filter(|(_, f)| !**f).map(|((a, b), _)| a * b).sum();
        let den: f64 = y.iter().zip(mass).zip(&forms.fixed).filter(|(_, f)| !**f).map(|((a, m), _)| a * a * m).sum();
        let next = num / den;
        let norm = den.sqrt();
        x = y.iter().map(|v| v / norm).collect();
        if (next - lambda).abs() <= 1e-10 * next.abs() {
            return Ok(next);
        }
        lambda = next;
    }
    Ok(lambda)
}
