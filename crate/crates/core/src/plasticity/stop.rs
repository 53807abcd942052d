//! Stop operator with kinematic hardening.

use serde::{Deserialize, Serialize};

use super::tensor::{Isotropic4, SymTensor};
use super::yield_surface::YieldSurface;
use crate::error::{invalid_param, Error, Result};

/// Hardening, elasticity and viscosity tensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasticTensors {
    pub ah: Isotropic4,
    pub ae: Isotropic4,
    pub b: Isotropic4,
}

impl Default for ElasticTensors {
    fn default() -> Self {
        ElasticTensors {
            ah: Isotropic4::scalar(1.0).unwrap(),
            ae: Isotropic4::scalar(1.0).unwrap(),
            b: Isotropic4::scalar(0.1).unwrap(),
        }
    }
}

impl ElasticTensors {
    pub fn new(ah: Isotropic4, ae: Isotropic4, b: Isotropic4) -> Self {
        ElasticTensors { ah, ae, b }
    }

    /// Common lower bound for `Ah` and `Ae`.
    pub fn a_flat(&self) -> f64 {
        self.ah.min_eigenvalue().min(self.ae.min_eigenvalue())
    }

    pub fn b_flat(&self) -> f64 {
        self.b.min_eigenvalue()
    }

    /// Scalar multiplier of `Ae`; projections need `Ae = c I`.
    pub fn ae_scalar(&self) -> Result<f64> {
        match self.ae.as_scalar() {
            Some(c) if c > 0.0 => Ok(c),
            _ => Err(invalid_param(
                "the elasticity tensor Ae must be a positive multiple of the identity",
            )),
        }
    }
}

/// State of the stop operator at one material point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlasticPoint {
    pub strain: SymTensor,
    pub sigma_p: SymTensor,
    /// `U_P` at the current strain.
    pub potential: f64,
    /// Accumulated dissipation.
    pub dissipation: f64,
}

impl PlasticPoint {
    pub fn new(eps0: SymTensor, tensors: &ElasticTensors, z: &YieldSurface) -> Self {
        let sigma_p = stop_init(&eps0, z);
        PlasticPoint {
            strain: eps0,
            sigma_p,
            potential: plastic_potential(&eps0, &sigma_p, tensors),
            dissipation: 0.0,
        }
    }
}

/// Increments of one stop step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StopIncrement {
    pub d_sigma_p: SymTensor,
    pub d_dp: SymTensor,
    pub dissipation: f64,
}

/// `sigma_p(0) = Q_Z(eps0)`.
pub fn stop_init(eps0: &SymTensor, z: &YieldSurface) -> SymTensor {
    z.project(eps0)
}

/// `U_P = Ah eps : eps / 2 + Ae^{-1} sigma_p : sigma_p / 2`.
pub fn plastic_potential(eps: &SymTensor, sigma_p: &SymTensor, t: &ElasticTensors) -> f64 {
    0.5 * t.ah.quadratic(eps) + 0.5 * t.ae.inverse_quadratic(sigma_p)
}

/// `P = Ah eps + sigma_p`.
pub fn p_eval(eps: &SymTensor, point: &PlasticPoint, t: &ElasticTensors) -> SymTensor {
    t.ah.apply(eps) + point.sigma_p
}

/// Implicit catch-up step: project the elastic predictor back onto `Z`.
pub fn stop_step(
    point: &PlasticPoint,
    d_eps: &SymTensor,
    t: &ElasticTensors,
    z: &YieldSurface,
) -> Result<(PlasticPoint, StopIncrement)> {
    let c = t.ae_scalar()?;
    let sigma_p = z.project(&(point.sigma_p + *d_eps * c));
    let d_sigma_p = sigma_p - point.sigma_p;
    let d_dp = *d_eps - d_sigma_p * (1.0 / c);
    let dissipation = z.support(&d_dp)?;
    let strain = point.strain + *d_eps;
    let next = PlasticPoint {
        strain,
        sigma_p,
        potential: plastic_potential(&strain, &sigma_p, t),
        dissipation: point.dissipation + dissipation,
    };
    Ok((
        next,
        StopIncrement {
            d_sigma_p,
            d_dp,
            dissipation,
        },
    ))
}

/// Energy residual `P' : d_eps - dU_P - dissipation` of one step from `point`.
///
/// The implicit step over-dissipates by a nonnegative quadratic remainder;
/// a residual below `-1e-12` (relative) is a scheme violation.
pub fn energy_audit(
    point: &PlasticPoint,
    d_eps: &SymTensor,
    t: &ElasticTensors,
    z: &YieldSurface,
) -> Result<f64> {
    let (next, inc) = stop_step(point, d_eps, t, z)?;
    let p_new = p_eval(&next.strain, &next, t);
    let residual = p_new.dot(d_eps) - (next.potential - point.potential) - inc.dissipation;
    let scale = 1.0 + p_new.norm() * d_eps.norm() + next.potential.abs();
    if residual < -1e-12 * scale {
        return Err(Error::SchemeViolation(format!(
            "plastic energy residual {residual:e} is negative"
        )));
    }
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_model(ah: f64) -> (ElasticTensors, YieldSurface) {
        let one = Isotropic4::scalar(1.0).unwrap();
        let ah = Isotropic4::scalar(ah).unwrap();
        (ElasticTensors::new(ah, one, one), YieldSurface::ball(1.0).unwrap())
    }

    fn point_at(s: f64, t: &ElasticTensors) -> PlasticPoint {
        let sigma_p = SymTensor::uniaxial(s);
        PlasticPoint {
            strain: SymTensor::ZERO,
            sigma_p,
            potential: plastic_potential(&SymTensor::ZERO, &sigma_p, t),
            dissipation: 0.0,
        }
    }

    #[test]
    fn init_examples() {
        let z = YieldSurface::ball(1.0).unwrap();
        assert_eq!(stop_init(&SymTensor::ZERO, &z), SymTensor::ZERO);
        assert_eq!(stop_init(&SymTensor::uniaxial(3.0), &z), SymTensor::uniaxial(1.0));
        assert_eq!(stop_init(&SymTensor::uniaxial(0.4), &z), SymTensor::uniaxial(0.4));
    }

    #[test]
    fn scalar_step_examples() {
        let (t, z) = scalar_model(0.0);
        let d = SymTensor::uniaxial(0.5);
        let (p, inc) = stop_step(&point_at(0.0, &t), &d, &t, &z).unwrap();
        assert_eq!(p.sigma_p.0[0], 0.5);
        assert_eq!(inc.dissipation, 0.0);

        let (p, inc) = stop_step(&point_at(0.8, &t), &d, &t, &z).unwrap();
        assert!((p.sigma_p.0[0] - 1.0).abs() < 1e-15);
        assert!((inc.d_dp.0[0] - 0.3).abs() < 1e-15);
        assert!((inc.dissipation - 0.3).abs() < 1e-15);

        let (p, inc) = stop_step(&point_at(1.0, &t), &(-d), &t, &z).unwrap();
        assert_eq!(p.sigma_p.0[0], 0.5);
        assert_eq!(inc.dissipation, 0.0);
    }

    #[test]
    fn p_eval_arithmetic() {
        let two = Isotropic4::scalar(2.0).unwrap();
        let t = ElasticTensors::new(two, two, two);
        let pt = PlasticPoint { sigma_p: SymTensor::uniaxial(0.1), ..Default::default() };
        let p = p_eval(&SymTensor::uniaxial(0.3), &pt, &t);
        assert!((p.0[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn saturated_audit_is_half_ah_square() {
        let (t, z) = scalar_model(2.0);
        let r = energy_audit(&point_at(1.0, &t), &SymTensor::uniaxial(0.5), &t, &z).unwrap();
        assert!((r - 0.5 * 2.0 * 0.25).abs() < 1e-14);
        assert_eq!(energy_audit(&point_at(0.3, &t), &SymTensor::ZERO, &t, &z).unwrap(), 0.0);
    }

    #[test]
    fn non_scalar_ae_is_rejected() {
        let t = ElasticTensors::new(
            Isotropic4::scalar(1.0).unwrap(),
            Isotropic4::new(1.0, 1.0).unwrap(),
            Isotropic4::scalar(1.0).unwrap(),
        );
        let z = YieldSurface::ball(1.0).unwrap();
        assert!(stop_step(&PlasticPoint::default(), &SymTensor::uniaxial(0.1), &t, &z).is_err());
    }
}
