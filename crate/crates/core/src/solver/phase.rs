//! Relaxed phase inclusion, resolved per node by clamping.

use super::problem::Problem;
use crate::constitutive::CutoffPack;
use crate::error::Result;
use crate::hysteresis::{preisach_step, preisach_values, PlayBank};

/// Fields the phase step reads; normally the start-of-step state.
#[derive(Debug, Clone, Copy)]
pub struct Coupling<'a> {
    pub p: &'a [f64],
    pub theta: &'a [f64],
    pub div: &'a [f64],
}

/// Result of one phase step.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOutcome {
    pub chi: Vec<f64>,
    /// `(chi' - chi) / dt` per node.
    pub rate: Vec<f64>,
    /// Relaxation coefficient used at each node.
    pub gamma: Vec<f64>,
    /// Driving force `F` per node.
    pub forcing: Vec<f64>,
    pub max_rate: f64,
    /// `max |F| / gamma_flat`, the a priori rate bound.
    pub rate_bound: f64,
    /// Whether `|chi_t| <= |F| / gamma` held at every node.
    pub bound_ok: bool,
}

/// Driving force `F` of the phase inclusion at one node.
pub fn phase_forcing(cut: &CutoffPack, p: f64, g0: f64, u0: f64, theta: f64, div: f64) -> f64 {
    let c = &cut.laws.constants;
    (1.0 - c.rho_star) * (cut.phi(p) + p * g0 - u0 + p * div)
        + c.latent_heat * (cut.q(theta.max(0.0)) / c.theta_c - 1.0)
}

/// Exact resolvent step in the convention `chi' = clamp(chi + dt F / gamma)`.
#[inline]
pub fn phase_update(chi: f64, forcing: f64, gamma: f64, dt: f64) -> f64 {
    (chi + dt * forcing / gamma).clamp(0.0, 1.0)
}

/// Advances the liquid fraction with `F` frozen at the coupling fields.
pub fn step_phase(
    problem: &Problem,
    cut: &CutoffPack,
    chi: &[f64],
    banks: &[PlayBank],
    g0: &[f64],
    u0: &[f64],
    coupling: Coupling,
    dt: f64,
) -> Result<PhaseOutcome> {
    let laws = &problem.laws;
    let grid = &problem.grid;
    let n = chi.len();
    let mut out = PhaseOutcome {
        chi: Vec::with_capacity(n),
        rate: Vec::with_capacity(n),
        gamma: Vec::with_capacity(n),
        forcing: Vec::with_capacity(n),
        max_rate: 0.0,
        rate_bound: 0.0,
        bound_ok: true,
    };
    let gamma_flat = laws.relaxation.gamma_flat;
    for i in 0..n {
        let p = coupling.p[i];
        let (g, u) = if p == banks[i].last_input {
            (g0[i], u0[i])
        } else {
            let mut b = banks[i].clone();
            preisach_step(&mut b, p, &laws.density, grid)?;
            preisach_values(&b, &laws.density, grid)?
        };
        let f = phase_forcing(cut, p, g, u, coupling.theta[i], coupling.div[i]);
        let gamma = cut.gamma(p, coupling.theta[i], coupling.div[i]);
        let next = phase_update(chi[i], f, gamma, dt);
        let rate = (next - chi[i]) / dt;
        if rate.abs() > (f.abs() / gamma) * (1.0 + 1e-12) + 4.0 * f64::EPSILON / dt {
            out.bound_ok = false;
        }
        out.max_rate = out.max_rate.max(rate.abs());
        out.rate_bound = out.rate_bound.max(f.abs() / gamma_flat);
        out.chi.push(next);
        out.rate.push(rate);
        out.gamma.push(gamma);
        out.forcing.push(f);
    }
    Ok(out)
}
