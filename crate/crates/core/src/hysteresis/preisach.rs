//! Preisach operator as a weighted superposition of plays.

use super::density::PreisachDensity;
use super::play::{play_init_unchecked, play_step_unchecked};
use crate::constitutive::SaturationLaw;
use crate::error::{invalid_param, Error, Result};

/// Discrete memory radii with quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RGrid {
    levels: Vec<f64>,
    weights: Vec<f64>,
}

impl RGrid {
    pub fn new(levels: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || levels.len() != weights.len() {
            return Err(invalid_param("r-grid needs matching, nonempty levels and weights"));
        }
        if levels[0] <= 0.0 || levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid_param("r-grid levels must be positive and strictly increasing"));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(invalid_param("r-grid weights must be positive"));
        }
        Ok(RGrid { levels, weights })
    }

    /// Midpoint rule with `n` cells on `[r0, r1]`.
    pub fn midpoint(r0: f64, r1: f64, n: usize) -> Result<Self> {
        if n == 0 || !(r0 >= 0.0 && r1 > r0 && r1.is_finite()) {
            return Err(invalid_param("midpoint r-grid needs n >= 1 and 0 <= r0 < r1"));
        }
        let h = (r1 - r0) / n as f64;
        let levels = (0..n).map(|j| r0 + (j as f64 + 0.5) * h).collect();
        RGrid::new(levels, vec![h; n])
    }

    /// Midpoint grid over the `r`-support of `density`.
    pub fn for_density(density: &PreisachDensity, n: usize) -> Result<Self> {
        let (r0, r1) = density.r_support();
        RGrid::midpoint(r0, r1, n)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `sum_j w_j r_j psi*(r_j)`: Lipschitz constant of the dissipation.
    pub fn dissipation_lipschitz(&self, density: &PreisachDensity) -> f64 {
        self.levels
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| w * r * density.envelope(*r))
            .sum()
    }
}

/// Memory curve of one spatial point: one play state per `r`-level.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayBank {
    pub xi: Vec<f64>,
    pub last_input: f64,
}

impl PlayBank {
    /// Virgin bank for the initial input `p0`.
    pub fn init(p0: f64, grid: &RGrid) -> Self {
        PlayBank {
            xi: grid.levels.iter().map(|r| play_init_unchecked(p0, *r)).collect(),
            last_input: p0,
        }
    }

    /// Largest violation of `|last_input - xi_j| <= r_j`.
    pub fn band_excess(&self, grid: &RGrid) -> f64 {
        self.xi
            .iter()
            .zip(&grid.levels)
            .map(|(x, r)| (self.last_input - x).abs() - r)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn check(&self, grid: &RGrid) -> Result<()> {
        if self.xi.len() != grid.len() {
            return Err(Error::InvalidState(format!(
                "play bank has {} levels, r-grid has {}",
                self.xi.len(),
                grid.len()
            )));
        }
        Ok(())
    }
}

/// Increments of one Preisach step.
///
/// `work` is the input work `int p dG0` along the linear input path
/// from the previous to the new input; for this path the balance
/// `work = d_u0 + d_d0_abs` holds level by level.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HysteresisIncrement {
    pub d_g0: f64,
    pub d_u0: f64,
    pub d_d0_abs: f64,
    pub work: f64,
    /// `p_new * d_g0`, the endpoint work used by implicit schemes.
    pub endpoint_work: f64,
}

impl HysteresisIncrement {
    /// `work - d_u0 - d_d0_abs`, zero up to rounding.
    pub fn identity_residual(&self) -> f64 {
        self.work - self.d_u0 - self.d_d0_abs
    }

    /// `endpoint_work - d_u0 - d_d0_abs`, nonnegative for implicit steps.
    pub fn endpoint_excess(&self) -> f64 {
        self.endpoint_work - self.d_u0 - self.d_d0_abs
    }
}

/// `G0 = sum_j w_j cum0(r_j, xi_j)`.
pub fn preisach_eval(bank: &PlayBank, dens: &PreisachDensity, grid: &RGrid) -> Result<f64> {
    bank.check(grid)?;
    Ok(sum_levels(grid, &bank.xi, |r, x| dens.cum0(r, x)))
}

/// Preisach potential `U0 = sum_j w_j cum1(r_j, xi_j)`.
pub fn preisach_potential(bank: &PlayBank, dens: &PreisachDensity, grid: &RGrid) -> Result<f64> {
    bank.check(grid)?;
    Ok(sum_levels(grid, &bank.xi, |r, x| dens.cum1(r, x)))
}

/// Signed dissipation functional `D0 = sum_j w_j r_j cum0(r_j, xi_j)`.
pub fn preisach_dissipation(bank: &PlayBank, dens: &PreisachDensity, grid: &RGrid) -> Result<f64> {
    bank.check(grid)?;
    Ok(sum_levels(grid, &bank.xi, |r, x| r * dens.cum0(r, x)))
}

fn sum_levels(grid: &RGrid, xi: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    grid.levels
        .iter()
        .zip(&grid.weights)
        .zip(xi)
        .map(|((r, w), x)| w * f(*r, *x))
        .sum()
}

/// Advances every play to `p_new` and returns the increments.
pub fn preisach_step(
    bank: &mut PlayBank,
    p_new: f64,
    dens: &PreisachDensity,
    grid: &RGrid,
) -> Result<HysteresisIncrement> {
    bank.check(grid)?;
    if !p_new.is_finite() {
        return Err(invalid_param("Preisach input must be finite"));
    }
    let mut inc = HysteresisIncrement::default();
    for ((r, w), xi) in grid.levels.iter().zip(&grid.weights).zip(bank.xi.iter_mut()) {
        let next = play_step_unchecked(*xi, p_new, *r);
        if next != *xi {
            let (a0, a1) = dens.cums(*r, *xi);
            let (b0, b1) = dens.cums(*r, next);
            let dc0 = b0 - a0;
            let dc1 = b1 - a1;
            let diss = r * dc0.abs();
            inc.d_g0 += w * dc0;
            inc.d_u0 += w * dc1;
            inc.d_d0_abs += w * diss;
            inc.work += w * (dc1 + diss);
            *xi = next;
        }
    }
    inc.endpoint_work = p_new * inc.d_g0;
    bank.last_input = p_new;
    Ok(inc)
}

/// Value and slope of `p -> G0` for a trial input, starting from `bank`
/// without modifying it. The slope is the one-sided derivative in the
/// direction away from `bank.last_input`.
#[inline]
pub fn preisach_trial(bank: &PlayBank, p: f64, dens: &PreisachDensity, grid: &RGrid) -> (f64, f64) {
    let mut g = 0.0;
    let mut slope = 0.0;
    for ((r, w), xi) in grid.levels.iter().zip(&grid.weights).zip(&bank.xi) {
        let next = play_step_unchecked(*xi, p, *r);
        g += w * dens.cum0(*r, next);
        if next != *xi || (p - xi).abs() == *r {
            slope += w * dens.value(*r, next);
        }
    }
    (g, slope)
}

/// Same as [`preisach_trial`] given `g0 = G0` of `bank`; only the plays
/// that move are visited.
#[inline]
pub fn preisach_trial_from(bank: &PlayBank, g0: f64, p: f64, dens: &PreisachDensity, grid: &RGrid) -> (f64, f64) {
    let mut g = g0;
    let mut slope = 0.0;
    for ((r, w), xi) in grid.levels.iter().zip(&grid.weights).zip(&bank.xi) {
        let next = play_step_unchecked(*xi, p, *r);
        if next != *xi {
            g += w * (dens.cum0(*r, next) - dens.cum0(*r, *xi));
            slope += w * dens.value(*r, next);
        } else if (p - xi).abs() == *r {
            slope += w * dens.value(*r, next);
        }
    }
    (g, slope)
}

/// `(G0, U0)` of a bank in one pass.
pub fn preisach_values(bank: &PlayBank, dens: &PreisachDensity, grid: &RGrid) -> Result<(f64, f64)> {
    bank.check(grid)?;
    let mut g = 0.0;
    let mut u = 0.0;
    for ((r, w), xi) in grid.levels.iter().zip(&grid.weights).zip(&bank.xi) {
        let (c0, c1) = dens.cums(*r, *xi);
        g += w * c0;
        u += w * c1;
    }
    Ok((g, u))
}

/// `sum_j w_j int_0^{xi_j} h(v) psi(r_j, v) dv` for a nondecreasing `h`.
pub fn modified_potential(
    bank: &PlayBank,
    dens: &PreisachDensity,
    grid: &RGrid,
    h: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    bank.check(grid)?;
    let span = bank.xi.iter().fold(1.0_f64, |m, x| m.max(x.abs())) + 1.0;
    let n = 400;
    let mut prev = h(-span);
    for k in 1..=n {
        let s = -span + 2.0 * span * k as f64 / n as f64;
        let cur = h(s);
        if cur < prev - 1e-12 * (1.0 + prev.abs()) {
            return Err(invalid_param(format!(
                "modified potential needs a nondecreasing map, h decreases near {s}"
            )));
        }
        prev = cur;
    }
    Ok(sum_levels(grid, &bank.xi, |r, x| dens.weighted_cum(r, x, h)))
}

/// `G[p] = f(p) + G0[p]` for a bank already advanced to `p`.
pub fn g_eval(
    p: f64,
    bank: &PlayBank,
    dens: &PreisachDensity,
    grid: &RGrid,
    f: &SaturationLaw,
) -> Result<f64> {
    Ok(f.value(p) + preisach_eval(bank, dens, grid)?)
}
