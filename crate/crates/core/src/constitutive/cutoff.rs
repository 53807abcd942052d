//! Cut-off versions of the nonlinearities.
//!
//! Every map coincides with its uncut counterpart as long as its argument
//! stays inside `[-R, R]`, and takes the same arithmetic path there, so a
//! level that is never reached leaves results bit-for-bit unchanged.

use super::kirchhoff::{kirchhoff, kirchhoff_inverse, kirchhoff_slope};
use super::laws::MaterialLaws;
use crate::error::{invalid_param, Result};

/// `max(-r, min(z, r))`.
#[inline]
pub fn q_r(z: f64, r: f64) -> f64 {
    (-r).max(z.min(r))
}

/// Cut-off maps at level `r` (`r = inf` disables the cut-off).
#[derive(Debug, Clone, Copy)]
pub struct CutoffPack<'a> {
    pub laws: &'a MaterialLaws,
    pub r: f64,
}

impl<'a> CutoffPack<'a> {
    pub fn new(laws: &'a MaterialLaws, r: f64) -> Result<Self> {
        if !(r > 1.0) {
            return Err(invalid_param(format!("cut-off level must exceed 1, got {r}")));
        }
        Ok(CutoffPack { laws, r })
    }

    pub fn uncut(laws: &'a MaterialLaws) -> Self {
        CutoffPack {
            laws,
            r: f64::INFINITY,
        }
    }

    fn level(&self) -> Option<f64> {
        self.r.is_finite().then_some(self.r)
    }

    #[inline]
    pub fn q(&self, z: f64) -> f64 {
        q_r(z, self.r)
    }

    /// `f_R`: `f` with a linear C1 continuation outside `[-R, R]`.
    pub fn f(&self, p: f64) -> f64 {
        let f = &self.laws.saturation;
        let r = self.r;
        if p > r {
            f.value(r) + f.derivative(r) * (p - r)
        } else if p < -r {
            f.value(-r) + f.derivative(-r) * (p + r)
        } else {
            f.value(p)
        }
    }

    pub fn df(&self, p: f64) -> f64 {
        self.laws.saturation.derivative(self.q(p))
    }

    /// `Phi_R = int_0^p f_R`.
    pub fn phi(&self, p: f64) -> f64 {
        let f = &self.laws.saturation;
        let r = self.r;
        if p > r {
            let s = p - r;
            f.primitive(r) + f.value(r) * s + 0.5 * f.derivative(r) * s * s
        } else if p < -r {
            let s = p + r;
            f.primitive(-r) + f.value(-r) * s + 0.5 * f.derivative(-r) * s * s
        } else {
            f.primitive(p)
        }
    }

    /// `V_R = p f_R(p) - Phi_R(p)`.
    pub fn v(&self, p: f64) -> f64 {
        p * self.f(p) - self.phi(p)
    }

    pub fn mu(&self, p: f64) -> f64 {
        self.laws.mobility.value(self.q(p))
    }

    /// `M_R(p) = int_0^p mu_R`.
    pub fn m(&self, p: f64) -> f64 {
        kirchhoff(p, &self.laws.mobility, self.level())
    }

    pub fn m_inverse(&self, v: f64) -> Result<f64> {
        kirchhoff_inverse(v, &self.laws.mobility, self.level())
    }

    /// `gamma_R(p, theta, d) = gamma(Q_R(theta+) + (p^2 - R^2)+, d)`.
    pub fn gamma(&self, p: f64, theta: f64, div_u: f64) -> f64 {
        let shift = (p * p - self.r * self.r).max(0.0);
        self.laws
            .relaxation
            .value(self.q(theta.max(0.0)) + shift, div_u)
    }

    /// `kappa(Q_R(theta+))`.
    pub fn kappa(&self, theta: f64) -> f64 {
        kirchhoff_slope(theta, &self.laws.conductivity, self.level())
    }

    /// `K_R(theta) = int_0^theta kappa(Q_R(z+)) dz`.
    pub fn k(&self, theta: f64) -> f64 {
        kirchhoff(theta, &self.laws.conductivity, self.level())
    }

    pub fn k_inverse(&self, z: f64) -> Result<f64> {
        kirchhoff_inverse(z, &self.laws.conductivity, self.level())
    }
}
