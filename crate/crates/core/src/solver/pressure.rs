//! Backward Euler pressure step in the Kirchhoff variable `v = M_R(p)`.

use nalgebra::{DMatrix, DVector};

use super::newton::{damped_newton, NewtonSettings};
use super::problem::{Problem, SolverConfig};
use super::state::{Forms, SimState};
use crate::constitutive::CutoffPack;
use crate::error::{Error, Result};
use crate::hysteresis::{preisach_step, preisach_trial_from, preisach_values, HysteresisIncrement, PlayBank};

/// Result of one pressure step.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureOutcome {
    pub p: Vec<f64>,
    pub v: Vec<f64>,
    pub banks: Vec<PlayBank>,
    pub g0: Vec<f64>,
    pub u0: Vec<f64>,
    pub water: Vec<f64>,
    pub increments: Vec<HysteresisIncrement>,
    pub coefficients: Option<Vec<f64>>,
    pub iterations: usize,
    pub residual: f64,
}

/// Nodal mass-and-boundary part of the residual, shared by both modes.
struct NodalBalance<'a> {
    problem: &'a Problem,
    cut: &'a CutoffPack<'a>,
    forms: &'a Forms,
    banks: &'a [PlayBank],
    g0: &'a [f64],
    old_water: &'a [f64],
    mix: Vec<f64>,
    div: &'a [f64],
    p_star: Vec<f64>,
    dt: f64,
}

impl NodalBalance<'_> {
    /// `r_i = m_i (w_i(p) - W_i) / dt + a_i (p - p*)` and `dr_i/dv`.
    fn eval(&self, v: &[f64], with_slope: bool) -> Result<(Vec<f64>, Vec<f64>)> {
        let laws = &self.problem.laws;
        let n = v.len();
        let mut r = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(if with_slope { n } else { 0 });
        for i in 0..n {
            let p = self.cut.m_inverse(v[i])?;
            let (g0, slope) = preisach_trial_from(&self.banks[i], self.g0[i], p, &laws.density, &self.problem.grid);
            let m = self.forms.lumped[i];
            let a = self.forms.alpha[i];
            let w = self.mix[i] * (self.cut.f(p) + g0 + self.div[i]);
            r.push(m * (w - self.old_water[i]) / self.dt + a * (p - self.p_star[i]));
            if with_slope {
                let dw = self.mix[i] * (self.cut.df(p) + slope);
                d.push((m * dw / self.dt + a) / self.cut.mu(p));
            }
        }
        Ok((r, d))
    }

    fn scale(&self) -> f64 {
        let mut s: f64 = 1.0;
        for i in 0..self.old_water.len() {
            s = s.max(self.forms.lumped[i] * self.old_water[i].abs() / self.dt);
        }
        s
    }
}

/// Advances `p` and the play banks.
///
/// `chi` is the updated liquid fraction and `div` the divergence entering the
/// stored water (lagged by one step in plain splitting).
#[allow(clippy::too_many_arguments)]
pub fn step_pressure(
    problem: &Problem,
    cut: &CutoffPack,
    forms: &Forms,
    config: &SolverConfig,
    state: &SimState,
    chi: &[f64],
    div: &[f64],
    dt: f64,
) -> Result<PressureOutcome> {
    let t_new = state.t + dt;
    let mesh = &problem.mesh;
    let balance = NodalBalance {
        problem,
        cut,
        forms,
        banks: &state.banks,
        g0: &state.g0,
        old_water: &state.water,
        mix: chi.iter().map(|c| problem.laws.constants.mix(*c)).collect(),
        div,
        p_star: mesh
            .nodes()
            .iter()
            .map(|x| problem.boundary.p_star.eval(*x, t_new))
            .collect(),
        dt,
    };
    let settings = NewtonSettings {
        tolerance: config.tolerance,
        max_iterations: config.max_iterations,
        residual_scale: balance.scale(),
        label: "pressure",
    };

    let (v, coefficients, iterations, residual) = match (&forms.spectral, &state.coefficients) {
        (Some(basis), Some(c0)) => {
            let k = basis.len();
            let damping: Vec<f64> = basis
                .eigenvalues()
                .iter()
                .map(|l| l + config.eta * l * l)
                .collect();
            let modes: Vec<&[f64]> = (0..k).map(|j| basis.mode(j)).collect();
            let project = |r: &[f64]| -> Vec<f64> {
                modes.iter().map(|e| e.iter().zip(r).map(|(a, b)| a * b).sum()).collect()
            };
            let res = |c: &[f64]| -> Result<Vec<f64>> {
                let v = basis.synthesize(c);
                let (r, _) = balance.eval(&v, false)?;
                let mut out = project(&r);
                for j in 0..k {
                    out[j] += damping[j] * c[j];
                }
                Ok(out)
            };
            let solve = |c: &[f64], r: &[f64]| -> Result<Vec<f64>> {
                let v = basis.synthesize(c);
                let (_, d) = balance.eval(&v, true)?;
                let mut jac = DMatrix::<f64>::zeros(k, k);
                for a in 0..k {
                    for b in a..k {
                        let s: f64 = (0..d.len()).map(|i| modes[a][i] * d[i] * modes[b][i]).sum();
                        jac[(a, b)] = s;
                        jac[(b, a)] = s;
                    }
                    jac[(a, a)] += damping[a];
                }
                let rhs = DVector::from_iterator(k, r.iter().map(|x| -x));
                jac.lu()
                    .solve(&rhs)
                    .map(|x| x.iter().copied().collect())
                    .ok_or_else(|| Error::StepFailure("pressure: singular spectral Jacobian".into()))
            };
            let out = damped_newton(c0.clone(), &settings, res, solve, |_| true)?;
            let v = basis.synthesize(&out.x);
            (v, Some(out.x), out.iterations, out.residual)
        }
        _ => {
            let v0: Vec<f64> = state.p.iter().map(|p| cut.m(*p)).collect();
            let res = |v: &[f64]| -> Result<Vec<f64>> {
                let (mut r, _) = balance.eval(v, false)?;
                let kv = forms.stiffness.matvec(v);
                for (a, b) in r.iter_mut().zip(kv) {
                    *a += b;
                }
                Ok(r)
            };
            let solve = |v: &[f64], r: &[f64]| -> Result<Vec<f64>> {
                let (_, d) = balance.eval(v, true)?;
                let mut jac = forms.stiffness.clone();
                jac.add_diagonal(&d);
                let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
                jac.factor()?.solve(&rhs)
            };
            let out = damped_newton(v0, &settings, res, solve, |_| true)?;
            (out.x, None, out.iterations, out.residual)
        }
    };

    let laws = &problem.laws;
    let n = v.len();
    let mut p = Vec::with_capacity(n);
    let mut banks = state.banks.clone();
    let mut water = Vec::with_capacity(n);
    let mut increments = Vec::with_capacity(n);
    let mut g0 = Vec::with_capacity(n);
    let mut u0 = Vec::with_capacity(n);
    for i in 0..n {
        let pi = cut.m_inverse(v[i])?;
        increments.push(preisach_step(&mut banks[i], pi, &laws.density, &problem.grid)?);
        let (g, u) = preisach_values(&banks[i], &laws.density, &problem.grid)?;
        water.push(balance.mix[i] * (cut.f(pi) + g + div[i]));
        g0.push(g);
        u0.push(u);
        p.push(pi);
    }
    Ok(PressureOutcome {
        p,
        v,
        banks,
        g0,
        u0,
        water,
        increments,
        coefficients,
        iterations,
        residual,
    })
}
