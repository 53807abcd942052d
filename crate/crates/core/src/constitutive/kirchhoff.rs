//! Kirchhoff transforms `v = int_0^x coefficient` and their inverses.

use super::laws::{ConductivityLaw, MobilityLaw};
use crate::error::{Error, Result};

/// A diffusion coefficient that can be Kirchhoff-transformed.
pub trait KirchhoffLaw {
    fn coefficient(&self, x: f64) -> f64;

    /// Positive lower bound of the coefficient.
    fn lower_bound(&self) -> f64;

    /// Closed-form primitive, if known.
    fn primitive(&self, _x: f64) -> Option<f64> {
        None
    }

    /// Interval on which a cut-off at level `r` leaves the coefficient
    /// untouched; outside it the coefficient is frozen at the nearest end.
    fn cut_interval(&self, r: f64) -> (f64, f64) {
        (-r, r)
    }
}

impl KirchhoffLaw for MobilityLaw {
    fn coefficient(&self, x: f64) -> f64 {
        self.value(x)
    }
    fn lower_bound(&self) -> f64 {
        self.mu_flat
    }
    fn primitive(&self, x: f64) -> Option<f64> {
        Some(MobilityLaw::primitive(self, x))
    }
}

impl KirchhoffLaw for ConductivityLaw {
    fn coefficient(&self, x: f64) -> f64 {
        self.value(x)
    }
    fn lower_bound(&self) -> f64 {
        self.kappa_flat
    }
    fn primitive(&self, x: f64) -> Option<f64> {
        Some(ConductivityLaw::primitive(self, x))
    }
    fn cut_interval(&self, r: f64) -> (f64, f64) {
        (0.0, r)
    }
}

/// Coefficient given by a closure, integrated numerically.
pub struct FnLaw<F: Fn(f64) -> f64> {
    pub f: F,
    pub lower: f64,
}

impl<F: Fn(f64) -> f64> KirchhoffLaw for FnLaw<F> {
    fn coefficient(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn lower_bound(&self) -> f64 {
        self.lower
    }
}

fn primitive_or_quadrature<L: KirchhoffLaw + ?Sized>(law: &L, x: f64) -> f64 {
    match law.primitive(x) {
        Some(v) => v,
        None => adaptive_simpson(&|z| law.coefficient(z), 0.0, x, 1e-13),
    }
}

/// `int_0^x c(Q(z)) dz` where `Q` freezes the argument outside the cut
/// interval for level `r` (`None` means no cut-off).
pub fn kirchhoff<L: KirchhoffLaw + ?Sized>(x: f64, law: &L, r: Option<f64>) -> f64 {
    let (lo, hi) = law.cut_interval(r.unwrap_or(f64::INFINITY));
    if x > hi {
        primitive_or_quadrature(law, hi) + law.coefficient(hi) * (x - hi)
    } else if x < lo {
        primitive_or_quadrature(law, lo) + law.coefficient(lo) * (x - lo)
    } else {
        primitive_or_quadrature(law, x)
    }
}

/// Coefficient after the cut-off, the derivative of [`kirchhoff`].
pub fn kirchhoff_slope<L: KirchhoffLaw + ?Sized>(x: f64, law: &L, r: Option<f64>) -> f64 {
    let (lo, hi) = law.cut_interval(r.unwrap_or(f64::INFINITY));
    law.coefficient(x.clamp(lo, hi))
}

/// Inverse of [`kirchhoff`] by safeguarded Newton iteration.
///
/// The starting bracket `[min(0, v/l), max(0, v/l)]` with the lower bound
/// `l` of the coefficient depends on neither the cut-off level nor any
/// previous call, so identical inputs give identical outputs.
pub fn kirchhoff_inverse<L: KirchhoffLaw + ?Sized>(v: f64, law: &L, r: Option<f64>) -> Result<f64> {
    if v == 0.0 {
        return Ok(0.0);
    }
    let l = law.lower_bound();
    if !(l > 0.0) || !v.is_finite() {
        return Err(Error::Internal(format!(
            "cannot invert a Kirchhoff transform with lower bound {l} at {v}"
        )));
    }
    let (mut a, mut b) = if v > 0.0 { (0.0, v / l) } else { (v / l, 0.0) };
    let tol = 1e-14 * (1.0 + v.abs());
    let mut x = v / law.coefficient(0.0).max(l);
    x = x.clamp(a, b);
    for _ in 0..200 {
        let res = kirchhoff(x, law, r) - v;
        if res.abs() <= tol {
            return Ok(x);
        }
        if res > 0.0 {
            b = x;
        } else {
            a = x;
        }
        let slope = kirchhoff_slope(x, law, r);
        let mut next = x - res / slope;
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if next == x || b - a <= 4.0 * f64::EPSILON * b.abs().max(a.abs()) {
            return Ok(x);
        }
        x = next;
    }
    let res = kirchhoff(x, law, r) - v;
    if res.abs() <= 1e-12 * (1.0 + v.abs()) {
        Ok(x)
    } else {
        Err(Error::Internal(format!("Kirchhoff inversion stalled at {v}")))
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
