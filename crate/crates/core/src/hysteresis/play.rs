//! Scalar play operator.
//!
//! For a memory radius `r` the play output `xi` follows the input `p` while
//! `|p - xi| <= r` is active and stays put otherwise. For inputs that are
//! monotone between sampling instants the update below is the exact solution
//! of the underlying variational inequality, not an approximation of it.

use crate::error::{invalid_param, Result};

/// Initial memory state for radius `r` given the initial input `p0`.
pub fn play_init(p0: f64, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(play_init_unchecked(p0, r))
}

/// Advances the play from `xi_prev` to the new input `p_new`.
pub fn play_step(xi_prev: f64, p_new: f64, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(play_step_unchecked(xi_prev, p_new, r))
}

#[inline]
pub(crate) fn play_init_unchecked(p0: f64, r: f64) -> f64 {
    (p0 - r).max((p0 + r).min(0.0))
}

#[inline]
pub(crate) fn play_step_unchecked(xi_prev: f64, p_new: f64, r: f64) -> f64 {
    (p_new + r).min((p_new - r).max(xi_prev))
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(invalid_param(format!("play radius must be >= 0, got {r}")))
    }
}

/// Dissipated energy `r |xi_new - xi_prev|` of a single play update.
///
/// Equals `(xi_new - xi_prev) * (p_new - xi_new)` exactly: whenever the
/// memory moves it sits on the edge of the band.
pub fn play_dissipation(xi_prev: f64, xi_new: f64, r: f64) -> f64 {
    r * (xi_new - xi_prev).abs()
}
