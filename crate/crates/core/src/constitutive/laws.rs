//! Concrete material laws and physical constants.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};
use crate::hysteresis::PreisachDensity;
use crate::plasticity::{ElasticTensors, YieldSurface};

/// Non-hysteretic part `f` of the pressure-saturation relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SaturationLaw {
    /// `f(p) = c0 + sgn(p) (f_flat / nu) (1 - (1 + |p|)^-nu)`, so that
    /// `f'(p) = f_flat (1 + |p|)^(-1 - nu)` sits on the lower growth envelope.
    Envelope {
        c0: f64,
        f_flat: f64,
        f_sharp: f64,
        nu: f64,
    },
    /// `f(p) = c0 + slope p`; unbounded, only meant for linear test problems.
    Linear { c0: f64, slope: f64 },
}

impl Default for SaturationLaw {
    fn default() -> Self {
        SaturationLaw::Envelope {
            c0: 0.5,
            f_flat: 0.15,
            f_sharp: 0.2,
            nu: 0.5,
        }
    }
}

impl SaturationLaw {
    pub fn value(&self, p: f64) -> f64 {
        match *self {
            SaturationLaw::Envelope { c0, f_flat, nu, .. } => {
                c0 + p.signum() * (f_flat / nu) * (1.0 - (1.0 + p.abs()).powf(-nu))
            }
            SaturationLaw::Linear { c0, slope } => c0 + slope * p,
        }
    }

    pub fn derivative(&self, p: f64) -> f64 {
        match *self {
            SaturationLaw::Envelope { f_flat, nu, .. } => f_flat * (1.0 + p.abs()).powf(-1.0 - nu),
            SaturationLaw::Linear { slope, .. } => slope,
        }
    }

    /// `Phi(p) = int_0^p f`.
    pub fn primitive(&self, p: f64) -> f64 {
        match *self {
            SaturationLaw::Envelope { c0, f_flat, nu, .. } => {
                let q = p.abs();
                let tail = if (nu - 1.0).abs() < 1e-14 {
                    (1.0 + q).ln()
                } else {
                    ((1.0 + q).powf(1.0 - nu) - 1.0) / (1.0 - nu)
                };
                c0 * p + (f_flat / nu) * (q - tail)
            }
            SaturationLaw::Linear { c0, slope } => c0 * p + 0.5 * slope * p * p,
        }
    }

    /// Infimum and supremum of `f` over the real line.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            SaturationLaw::Envelope { c0, f_flat, nu, .. } => {
                (c0 - f_flat / nu, c0 + f_flat / nu)
            }
            SaturationLaw::Linear { slope, .. } if slope == 0.0 => {
                let c = self.value(0.0);
                (c, c)
            }
            SaturationLaw::Linear { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

/// Mobility `mu(p) = mu_flat (1 + amp p^2 / (1 + p^2))`; `amp = 0` is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityLaw {
    pub mu_flat: f64,
    pub modulation: f64,
}

impl Default for MobilityLaw {
    fn default() -> Self {
        MobilityLaw {
            mu_flat: 1.0,
            modulation: 0.0,
        }
    }
}

impl MobilityLaw {
    pub fn constant(mu: f64) -> Self {
        MobilityLaw {
            mu_flat: mu,
            modulation: 0.0,
        }
    }

    pub fn value(&self, p: f64) -> f64 {
        if self.modulation == 0.0 {
            return self.mu_flat;
        }
        let s = p * p;
        self.mu_flat * (1.0 + self.modulation * s / (1.0 + s))
    }

    /// `M(p) = int_0^p mu`.
    pub fn primitive(&self, p: f64) -> f64 {
        if self.modulation == 0.0 {
            return self.mu_flat * p;
        }
        self.mu_flat * (p + self.modulation * (p - p.atan()))
    }
}

/// Heat capacity `c_V(theta) = c_flat (1 + theta^b)` for `theta >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatCapacityLaw {
    pub c_flat: f64,
    pub c_sharp: f64,
    pub b: f64,
    pub b_hat: f64,
}

impl Default for HeatCapacityLaw {
    fn default() -> Self {
        HeatCapacityLaw {
            c_flat: 0.05,
            c_sharp: 0.1,
            b: 0.5,
            b_hat: 0.75,
        }
    }
}

impl HeatCapacityLaw {
    /// `c_V`; continued by the constant `c_flat` below zero.
    pub fn value(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            self.c_flat
        } else {
            self.c_flat * (1.0 + theta.powf(self.b))
        }
    }

    /// Caloric energy `C_V(theta) = int_0^theta c_V`.
    pub fn energy(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            self.c_flat * theta
        } else {
            self.c_flat * (theta + theta.powf(1.0 + self.b) / (1.0 + self.b))
        }
    }
}

/// Conductivity `kappa(theta) = kappa_flat (1 + theta^(1 + a))` for `theta >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConductivityLaw {
    pub kappa_flat: f64,
    pub kappa_sharp: f64,
    pub a: f64,
    pub a_hat: f64,
}

impl Default for ConductivityLaw {
    fn default() -> Self {
        ConductivityLaw {
            kappa_flat: 0.01,
            kappa_sharp: 0.02,
            a: 0.25,
            a_hat: 1.0,
        }
    }
}

impl ConductivityLaw {
    pub fn value(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            self.kappa_flat
        } else {
            self.kappa_flat * (1.0 + theta.powf(1.0 + self.a))
        }
    }

    /// `K(theta) = int_0^theta kappa`.
    pub fn primitive(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            self.kappa_flat * theta
        } else {
            self.kappa_flat * (theta + theta.powf(2.0 + self.a) / (2.0 + self.a))
        }
    }
}

/// Phase relaxation `gamma(theta, d) = gamma_flat (1 + theta + d^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelaxationLaw {
    pub gamma_flat: f64,
    pub gamma_sharp: f64,
}

impl Default for RelaxationLaw {
    fn default() -> Self {
        RelaxationLaw {
            gamma_flat: 1e-5,
            gamma_sharp: 2e-5,
        }
    }
}

impl RelaxationLaw {
    pub fn value(&self, theta: f64, div_u: f64) -> f64 {
        self.gamma_flat * (1.0 + theta + div_u * div_u)
    }
}

/// Scalar physical constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConstants {
    /// Ice to water mass density ratio.
    pub rho_star: f64,
    pub latent_heat: f64,
    pub theta_c: f64,
    pub beta: f64,
    /// Lower bound for initial and boundary temperatures.
    pub theta_bar: f64,
    pub rho_w: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            rho_star: 0.917,
            latent_heat: 1.0,
            theta_c: 273.15,
            beta: 0.1,
            theta_bar: 1.0,
            rho_w: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_star > 0.0 && self.rho_star < 1.0) {
            return Err(invalid_param("rho_star must lie in (0, 1)"));
        }
        if !(self.latent_heat > 0.0 && self.theta_c > 0.0 && self.theta_bar > 0.0) {
            return Err(invalid_param("latent heat, theta_c and theta_bar must be positive"));
        }
        if !(self.rho_w > 0.0 && self.beta.is_finite()) {
            return Err(invalid_param("rho_w must be positive and beta finite"));
        }
        Ok(())
    }

    /// `chi + rho_star (1 - chi)`.
    #[inline]
    pub fn mix(&self, chi: f64) -> f64 {
        chi + self.rho_star * (1.0 - chi)
    }
}

/// All constitutive data of one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialLaws {
    pub saturation: SaturationLaw,
    pub mobility: MobilityLaw,
    pub heat_capacity: HeatCapacityLaw,
    pub conductivity: ConductivityLaw,
    pub relaxation: RelaxationLaw,
    pub constants: PhysicalConstants,
    pub tensors: ElasticTensors,
    pub yield_surface: YieldSurface,
    pub density: PreisachDensity,
}

impl Default for MaterialLaws {
    fn default() -> Self {
        MaterialLaws {
            saturation: SaturationLaw::default(),
            mobility: MobilityLaw::default(),
            heat_capacity: HeatCapacityLaw::default(),
            conductivity: ConductivityLaw::default(),
            relaxation: RelaxationLaw::default(),
            constants: PhysicalConstants::default(),
            tensors: ElasticTensors::default(),
            yield_surface: YieldSurface::default(),
            density: PreisachDensity::default_box(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn saturation_primitive_and_derivative() {
        let f = SaturationLaw::default();
        for &p in &[-7.0, -0.3, 0.0, 0.8, 12.0] {
            let q = simpson(0.0, p, 20_000, |z| f.value(z));
            assert!((f.primitive(p) - q).abs() < 1e-9, "p = {p}");
            let h = 1e-6;
            let fd = (f.value(p + h) - f.value(p - h)) / (2.0 * h);
            if p != 0.0 {
                assert!((fd - f.derivative(p)).abs() < 1e-7);
            }
        }
        let (lo, hi) = f.range();
        assert!((lo - 0.2).abs() < 1e-15 && (hi - 0.8).abs() < 1e-15);
        assert_eq!(f.value(0.0), 0.5);
    }

    #[test]
    fn energies_are_primitives() {
        let c = HeatCapacityLaw::default();
        let k = ConductivityLaw::default();
        let m = MobilityLaw { mu_flat: 0.7, modulation: 0.4 };
        for &x in &[0.0, 0.5, 3.0, 280.0] {
            assert!((c.energy(x) - simpson(0.0, x, 20_000, |t| c.value(t))).abs() < 1e-7 * (1.0 + c.energy(x)));
            assert!((k.primitive(x) - simpson(0.0, x, 20_000, |t| k.value(t))).abs() < 1e-7 * (1.0 + k.primitive(x)));
            assert!((m.primitive(x) - simpson(0.0, x, 20_000, |t| m.value(t))).abs() < 1e-9 * (1.0 + x));
        }
        assert!((m.primitive(-2.0) + m.primitive(2.0)).abs() < 1e-15);
    }
}
