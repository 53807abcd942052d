//! Damped Newton iteration shared by the nonlinear sub-solves.

use crate::error::{Error, Result};

/// Outcome of a converged Newton solve.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Max-norm of the final residual divided by its scale.
    pub residual: f64,
}

pub(crate) struct NewtonSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Scale that makes the residual relative.
    pub residual_scale: f64,
    pub label: &'static str,
}

fn norm2(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn norm_inf(r: &[f64]) -> f64 {
    r.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Newton with backtracking on the Euclidean residual norm.
///
/// `solve(x, r)` returns the Newton correction `delta` with `J(x) delta = -r`;
/// `admissible` rejects trial points (e.g. nonpositive temperatures).
pub(crate) fn damped_newton(
    x0: Vec<f64>,
    settings: &NewtonSettings,
    mut residual: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    mut solve: impl FnMut(&[f64], &[f64]) -> Result<Vec<f64>>,
    admissible: impl Fn(&[f64]) -> bool,
) -> Result<NewtonResult> {
    let tol = settings.tolerance;
    let scale = settings.residual_scale.max(f64::MIN_POSITIVE);
    let mut x = x0;
    let mut r = residual(&x)?;
    for it in 0..settings.max_iterations {
        if norm_inf(&r) <= tol * scale {
            return Ok(NewtonResult {
                residual: norm_inf(&r) / scale,
                x,
                iterations: it,
            });
        }
        let delta = solve(&x, &r)?;
        let base = norm2(&r);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..20 {
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
            if admissible(&trial) {
                let rt = residual(&trial)?;
                let n = norm2(&rt);
                if n.is_finite() && n <= (1.0 - 1e-4 * lambda) * base {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let step = lambda * norm_inf(&delta);
        let size = 1.0 + norm_inf(&x);
        match accepted {
            Some((trial, rt)) => {
                x = trial;
                r = rt;
                if step <= tol * size {
                    return Ok(NewtonResult {
                        residual: norm_inf(&r) / scale,
                        x,
                        iterations: it + 1,
                    });
                }
            }
            None => {
                // No decrease possible: either converged to rounding or stuck.
                if norm_inf(&delta) <= 1e3 * tol * size {
                    return Ok(NewtonResult {
                        residual: norm_inf(&r) / scale,
                        x,
                        iterations: it + 1,
                    });
                }
                return Err(Error::StepFailure(format!(
                    "{}: line search failed at iteration {it}",
                    settings.label
                )));
            }
        }
    }
    if norm_inf(&r) <= tol * scale {
        return Ok(NewtonResult {
            residual: norm_inf(&r) / scale,
            x,
            iterations: settings.max_iterations,
        });
    }
    Err(Error::StepFailure(format!(
        "{}: no convergence after {} iterations (residual {:e})",
        settings.label,
        settings.max_iterations,
        norm_inf(&r) / scale
    )))
}
