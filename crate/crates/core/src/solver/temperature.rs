//! Backward Euler heat step in the Kirchhoff variable `z = K_R(theta)`.

use super::newton::{damped_newton, NewtonSettings};
use super::problem::{Problem, SolverConfig};
use super::state::Forms;
use crate::constitutive::CutoffPack;
use crate::error::{Error, Result};

/// Heat sources and sink coefficients of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatInput {
    /// Integrated source rate per cell, shared equally by the cell's nodes.
    pub cell_sources: Vec<f64>,
    /// Integrated source rate per node.
    pub node_sources: Vec<f64>,
    /// Sink coefficient `L chi_t / theta_c + beta (div u)_t` per node.
    pub sink: Vec<f64>,
}

impl HeatInput {
    pub fn zero(num_cells: usize, num_nodes: usize) -> Self {
        HeatInput {
            cell_sources: vec![0.0; num_cells],
            node_sources: vec![0.0; num_nodes],
            sink: vec![0.0; num_nodes],
        }
    }
}

/// Result of one temperature step.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureOutcome {
    pub theta: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// `sum_i b_i (theta'_i - theta*_i)`, the boundary heat loss rate.
    pub boundary_rate: f64,
}

/// Advances the temperature.
///
/// The sink is implicit in `theta'` where its coefficient is nonnegative
/// and explicit where it acts as a source, which keeps every step monotone.
#[allow(clippy::too_many_arguments)]
pub fn step_temperature(
    problem: &Problem,
    cut: &CutoffPack,
    forms: &Forms,
    config: &SolverConfig,
    theta_old: &[f64],
    input: &HeatInput,
    t_new: f64,
    dt: f64,
) -> Result<TemperatureOutcome> {
    let mesh = &problem.mesh;
    let cv = &problem.laws.heat_capacity;
    let n = theta_old.len();
    let mut src = input.node_sources.clone();
    for (k, cell) in mesh.cells().iter().enumerate() {
        let share = input.cell_sources[k] / cell.len() as f64;
        for &i in cell {
            src[i] += share;
        }
    }
    let mut implicit = vec![0.0; n];
    for i in 0..n {
        let h = input.sink[i];
        if h >= 0.0 {
            implicit[i] = forms.lumped[i] * h;
        } else {
            src[i] -= forms.lumped[i] * h * cut.q(theta_old[i].max(0.0));
        }
    }
    let theta_star: Vec<f64> = mesh
        .nodes()
        .iter()
        .map(|x| problem.boundary.theta_star.eval(*x, t_new))
        .collect();
    let old_energy: Vec<f64> = theta_old.iter().map(|t| cv.energy(*t)).collect();

    let res = |th: &[f64]| -> Result<Vec<f64>> {
        let z: Vec<f64> = th.iter().map(|t| cut.k(*t)).collect();
        let mut r = forms.stiffness.matvec(&z);
        for i in 0..n {
            r[i] += forms.lumped[i] * (cv.energy(th[i]) - old_energy[i]) / dt
                + forms.omega[i] * (th[i] - theta_star[i])
                - src[i]
                + implicit[i] * cut.q(th[i].max(0.0));
        }
        Ok(r)
    };
    let solve = |th: &[f64], r: &[f64]| -> Result<Vec<f64>> {
        let kappa: Vec<f64> = th.iter().map(|t| cut.kappa(*t)).collect();
        let mut jac = forms.stiffness.clone();
        jac.scale_columns(&kappa);
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let dq = if th[i] > 0.0 && th[i] < cut.r { 1.0 } else { 0.0 };
                forms.lumped[i] * cv.value(th[i]) / dt + forms.omega[i] + implicit[i] * dq
            })
            .collect();
        jac.add_diagonal(&diag);
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        jac.factor()?.solve(&rhs)
    };
    let scale = (0..n).fold(1.0_f64, |s, i| {
        s.max(forms.lumped[i] * old_energy[i].abs() / dt)
            .max(src[i].abs())
    });
    let settings = NewtonSettings {
        tolerance: config.tolerance,
        max_iterations: config.max_iterations,
        residual_scale: scale,
        label: "temperature",
    };
    let out = damped_newton(theta_old.to_vec(), &settings, res, solve, |th| {
        th.iter().all(|t| *t > 0.0)
    })?;
    if let Some(i) = out.x.iter().position(|t| !(*t > 0.0)) {
        return Err(Error::PositivityViolation(format!(
            "temperature {} at node {i}",
            out.x[i]
        )));
    }
    let boundary_rate = (0..n)
        .map(|i| forms.omega[i] * (out.x[i] - theta_star[i]))
        .sum();
    Ok(TemperatureOutcome {
        theta: out.x,
        iterations: out.iterations,
        residual: out.residual,
        boundary_rate,
    })
}
