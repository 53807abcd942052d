//! Cosine eigenbasis of the Neumann Laplacian on an interval.

use std::f64::consts::PI;

use super::assembly::lumped_mass;
use super::mesh::Mesh;
use crate::error::{invalid_param, Result};

/// First `n + 1` Neumann eigenfunctions sampled at the nodes of a 1D mesh.
#[derive(Debug, Clone)]
pub struct SpectralBasis1D {
    length: f64,
    lambda: Vec<f64>,
    // values[i][j] = e_i(x_j)
    values: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl SpectralBasis1D {
    /// `e_0 = 1/sqrt(l)`, `e_i = sqrt(2/l) cos(i pi (x - a) / l)`, `lambda_i = (i pi / l)^2`.
    pub fn new(mesh: &Mesh, n: usize) -> Result<Self> {
        if mesh.dim() != 1 {
            return Err(invalid_param("spectral basis needs a one-dimensional mesh"));
        }
        if n + 1 > mesh.num_nodes() - 1 {
            return Err(invalid_param(format!(
                "{} modes need more than {} mesh cells",
                n + 1,
                mesh.num_cells()
            )));
        }
        let xs: Vec<f64> = mesh.nodes().iter().map(|x| x[0]).collect();
        let a = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let b = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let l = b - a;
        let values = (0..=n)
            .map(|i| {
                xs.iter()
                    .map(|x| {
                        if i == 0 {
                            1.0 / l.sqrt()
                        } else {
                            (2.0 / l).sqrt() * (i as f64 * PI * (x - a) / l).cos()
                        }
                    })
                    .collect()
            })
            .collect();
        let lambda = (0..=n).map(|i| (i as f64 * PI / l).powi(2)).collect();
        Ok(SpectralBasis1D {
            length: l,
            lambda,
            values,
            weights: lumped_mass(mesh),
        })
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambda
    }

    /// Nodal values of mode `i`.
    pub fn mode(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    /// Discrete product `sum_j m_j a_j b_j`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
    }

    /// Coefficients of the discrete projection of a nodal field.
    pub fn project(&self, field: &[f64]) -> Vec<f64> {
        self.values.iter().map(|e| self.inner(e, field)).collect()
    }

    /// Nodal values of `sum_i c_i e_i`.
    pub fn synthesize(&self, coef: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.weights.len()];
        for (c, e) in coef.iter().zip(&self.values) {
            for (o, v) in out.iter_mut().zip(e) {
                *o += c * v;
            }
        }
        out
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}
