//! Quasistatic-viscous momentum balance with the stop operator.

use super::problem::{Problem, SolverConfig};
use super::state::{Forms, SimState};
use crate::constitutive::CutoffPack;
use crate::discretization::{cell_strain, divergence_load, internal_force, nodal_divergence, BandLu};
use crate::error::{Error, Result};
use crate::plasticity::{stop_step, PlasticPoint, SymTensor};

/// Result of one momentum step.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumOutcome {
    pub u: Vec<f64>,
    pub div: Vec<f64>,
    pub points: Vec<PlasticPoint>,
    /// Viscous dissipation per cell over the step, `|e| B de : de / dt`.
    pub viscous: Vec<f64>,
    /// Plastic dissipation per cell over the step.
    pub plastic: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Factorized Picard operator `B/dt + Ah + Ae` with Dirichlet rows.
pub fn momentum_operator(forms: &Forms, dt: f64) -> Result<BandLu> {
    let mut a = forms.viscous.scaled(1.0 / dt);
    a.add_scaled(1.0, &forms.hardening);
    a.add_scaled(1.0, &forms.elastic);
    forms.constraints.constrain(&mut a);
    a.factor()
}

/// Load density `p S(chi) + beta (Q_R(theta+) - theta_c)` averaged per cell.
pub fn momentum_load(problem: &Problem, cut: &CutoffPack, p: &[f64], chi: &[f64], theta: &[f64]) -> Vec<f64> {
    let c = &problem.laws.constants;
    problem
        .mesh
        .cells()
        .iter()
        .map(|cell| {
            let nv = cell.len() as f64;
            let ps: f64 = cell.iter().map(|&i| p[i] * c.mix(chi[i])).sum::<f64>() / nv;
            let q: f64 = cell.iter().map(|&i| cut.q(theta[i].max(0.0))).sum::<f64>() / nv;
            ps + c.beta * (q - c.theta_c)
        })
        .collect()
}

/// Stabilized frozen-stress Picard iteration for the new displacement.
#[allow(clippy::too_many_arguments)]
pub fn step_momentum(
    problem: &Problem,
    cut: &CutoffPack,
    forms: &Forms,
    config: &SolverConfig,
    operator: &BandLu,
    state: &SimState,
    p: &[f64],
    chi: &[f64],
    theta: &[f64],
    dt: f64,
) -> Result<MomentumOutcome> {
    let mesh = &problem.mesh;
    let laws = &problem.laws;
    let w = momentum_load(problem, cut, p, chi, theta);
    let mut fixed_rhs = forms.viscous.matvec(&state.u);
    for x in fixed_rhs.iter_mut() {
        *x /= dt;
    }
    for ((x, a), b) in fixed_rhs.iter_mut().zip(divergence_load(mesh, &w)).zip(&forms.gravity) {
        *x += a + b;
    }
    let old_strain: Vec<SymTensor> = state.points.iter().map(|pt| pt.strain).collect();
    let stresses = |u: &[f64]| -> Result<(Vec<PlasticPoint>, Vec<f64>)> {
        let mut pts = Vec::with_capacity(old_strain.len());
        let mut diss = Vec::with_capacity(old_strain.len());
        for k in 0..old_strain.len() {
            let de = cell_strain(mesh, k, u) - old_strain[k];
            let (next, inc) = stop_step(&state.points[k], &de, &laws.tensors, &laws.yield_surface)?;
            pts.push(next);
            diss.push(inc.dissipation);
        }
        Ok((pts, diss))
    };

    let mut u = state.u.clone();
    let mut iterations = 0;
    let mut change = f64::INFINITY;
    let mut converged = None;
    while iterations < config.max_iterations {
        iterations += 1;
        let (pts, _) = stresses(&u)?;
        let sigma: Vec<SymTensor> = pts.iter().map(|pt| pt.sigma_p).collect();
        let mut rhs = forms.elastic.matvec(&u);
        for ((x, a), b) in rhs.iter_mut().zip(&fixed_rhs).zip(internal_force(mesh, &sigma)) {
            *x += a - b;
        }
        forms.constraints.zero_fixed(&mut rhs);
        let next = operator.solve(&rhs)?;
        change = next.iter().zip(&u).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let size = 1.0 + next.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        u = next;
        if !change.is_finite() {
            break;
        }
        if change <= config.tolerance * size {
            converged = Some(change / size);
            break;
        }
    }
    let residual = converged.ok_or_else(|| {
        Error::StepFailure(format!(
            "momentum: Picard iteration did not converge in {iterations} iterations (last change {change:e})"
        ))
    })?;
    let (points, plastic) = stresses(&u)?;
    let viscous = (0..mesh.num_cells())
        .map(|k| {
            let de = points[k].strain - old_strain[k];
            mesh.cell_measure(k) * laws.tensors.b.quadratic(&de) / dt
        })
        .collect();
    let plastic = plastic
        .iter()
        .enumerate()
        .map(|(k, d)| mesh.cell_measure(k) * d)
        .collect();
    Ok(MomentumOutcome {
        div: nodal_divergence(mesh, &forms.lumped, &u),
        u,
        points,
        viscous,
        plastic,
        iterations,
        residual,
    })
}
