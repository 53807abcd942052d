//! Energy ledger, temperature floor and cut-off monitor.

use super::problem::Problem;
use super::state::{Forms, SimState};
use crate::constitutive::{CutoffPack, MaterialLaws};
use crate::error::Result;

/// Total internal energy of a state.
///
/// Integrand: `C_V(theta) + L chi + beta theta_c div u + S(chi) (V_R(p) + U0[p]) + U_P`.
pub fn internal_energy(problem: &Problem, cut: &CutoffPack, forms: &Forms, state: &SimState) -> Result<f64> {
    let laws = &problem.laws;
    let c = &laws.constants;
    let mut e = 0.0;
    for i in 0..state.p.len() {
        let u0 = state.u0[i];
        let density = laws.heat_capacity.energy(state.theta[i])
            + c.latent_heat * state.chi[i]
            + c.beta * c.theta_c * state.div[i]
            + c.mix(state.chi[i]) * (cut.v(state.p[i]) + u0);
        e += forms.lumped[i] * density;
    }
    for (k, pt) in state.points.iter().enumerate() {
        e += problem.mesh.cell_measure(k) * pt.potential;
    }
    Ok(e)
}

/// Potential of the volume force, `int g . u`.
pub fn gravity_work(forms: &Forms, u: &[f64]) -> f64 {
    forms.gravity.iter().zip(u).map(|(a, b)| a * b).sum()
}

/// One entry of the discrete energy balance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LedgerEntry {
    pub internal: f64,
    /// Time-integrated boundary losses up to this step.
    pub boundary_work: f64,
    /// `int g . u` at this step.
    pub gravity_work: f64,
    /// `int mu_R (|grad p|^2 - Q_R(|grad p|^2))` during the step.
    pub cut_waste: f64,
    /// Closure residual of this step.
    pub defect: f64,
    /// Sum of the absolute step defects so far.
    pub global_defect: f64,
}

/// Constant of the comparison ODE: `(L/theta_c)^2 / (4 gamma_flat) + 3 beta^2 / (4 B_flat)`.
pub fn floor_constant(laws: &MaterialLaws) -> f64 {
    let c = &laws.constants;
    let a = c.latent_heat / c.theta_c;
    a * a / (4.0 * laws.relaxation.gamma_flat) + 3.0 * c.beta * c.beta / (4.0 * laws.tensors.b_flat())
}

/// Uniform subsolution `phi` of the heat equation, from `C_V(phi)' = -C phi^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaFloor {
    pub constant: f64,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl ThetaFloor {
    /// Floor for the material laws, starting at `theta_bar`.
    pub fn new(laws: &MaterialLaws, t_end: f64) -> Self {
        let hc = laws.heat_capacity;
        Self::solve(move |t| hc.value(t), floor_constant(laws), laws.constants.theta_bar, t_end, 4096)
    }

    /// RK4 for `phi' = -C phi^2 / c_V(phi)` with `steps` uniform steps.
    pub fn solve(c_v: impl Fn(f64) -> f64, constant: f64, theta_bar: f64, t_end: f64, steps: usize) -> Self {
        let steps = steps.max(1);
        let h = t_end / steps as f64;
        let rhs = |phi: f64| -constant * phi * phi / c_v(phi);
        let mut times = Vec::with_capacity(steps + 1);
        let mut values = Vec::with_capacity(steps + 1);
        let mut phi = theta_bar;
        times.push(0.0);
        values.push(phi);
        for k in 0..steps {
            let k1 = rhs(phi);
            let k2 = rhs(phi + 0.5 * h * k1);
            let k3 = rhs(phi + 0.5 * h * k2);
            let k4 = rhs(phi + h * k3);
            phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            times.push((k + 1) as f64 * h);
            values.push(phi);
        }
        ThetaFloor {
            constant,
            times,
            values,
        }
    }

    /// `phi(t)` by linear interpolation, held constant past the end.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.times.len();
        if n == 1 || t <= 0.0 {
            return self.values[0];
        }
        let t_end = self.times[n - 1];
        if t >= t_end {
            return self.values[n - 1];
        }
        let s = t / t_end * (n - 1) as f64;
        let k = (s.floor() as usize).min(n - 2);
        let w = s - k as f64;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }

    /// `phi` at the final time.
    pub fn final_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn trajectory(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }
}

/// Which cut-off branches are active for a state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CutoffReport {
    pub r: f64,
    pub max_abs_p: f64,
    pub max_theta: f64,
    pub max_grad_sq: f64,
    /// Nodes with `|p| > R`: `f_R` and `mu_R` extensions and the `gamma_R` shift.
    pub pressure_nodes: Vec<usize>,
    /// Nodes with `theta > R`: `Q_R(theta+)` clips.
    pub temperature_nodes: Vec<usize>,
    /// Cells with `|grad p|^2 > R`.
    pub gradient_cells: Vec<usize>,
}

impl CutoffReport {
    pub fn active(&self) -> bool {
        !(self.pressure_nodes.is_empty() && self.temperature_nodes.is_empty() && self.gradient_cells.is_empty())
    }
}

/// Compares the state against the cut-off level `r`.
pub fn cutoff_monitor(problem: &Problem, state: &SimState, r: f64) -> CutoffReport {
    let mesh = &problem.mesh;
    let mut rep = CutoffReport {
        r,
        ..CutoffReport::default()
    };
    for (i, (&p, &t)) in state.p.iter().zip(&state.theta).enumerate() {
        rep.max_abs_p = rep.max_abs_p.max(p.abs());
        rep.max_theta = rep.max_theta.max(t);
        if p.abs() > r {
            rep.pressure_nodes.push(i);
        }
        if t > r {
            rep.temperature_nodes.push(i);
        }
    }
    for k in 0..mesh.num_cells() {
        let g = mesh.gradient(k, &state.p);
        let s = g[0] * g[0] + g[1] * g[1];
        rep.max_grad_sq = rep.max_grad_sq.max(s);
        if s > r {
            rep.gradient_cells.push(k);
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_closed_form() {
        let f = ThetaFloor::solve(|_| 1.0, 1.0, 1.0, 1.0, 1000);
        assert!((f.final_value() - 0.5).abs() < 1e-12);
        assert!((f.at(0.5) - 1.0 / 1.5).abs() < 1e-6);
    }

    #[test]
    fn zero_constant_is_flat() {
        let f = ThetaFloor::solve(|t| 1.0 + t, 0.0, 2.0, 3.0, 10);
        assert!(f.trajectory().all(|(_, v)| v == 2.0));
    }

    #[test]
    fn default_floor_decreases_and_stays_positive() {
        let f = ThetaFloor::new(&MaterialLaws::default(), 5.0);
        let v: Vec<f64> = f.trajectory().map(|(_, v)| v).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
        assert!(f.final_value() > 0.0);
    }
}
