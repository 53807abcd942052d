//! Convex yield sets, their projections and support functions.

use serde::{Deserialize, Serialize};

use super::tensor::SymTensor;
use crate::error::{invalid_param, Error, Result};

/// Admissible set `Z` for the plastic stress.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum YieldSurface {
    /// Frobenius ball `|s| <= radius`.
    Ball { radius: f64 },
    /// `|dev s| <= radius`, with `|tr s| <= trace_bound` when a bound is given.
    VonMisesCylinder {
        radius: f64,
        trace_bound: Option<f64>,
    },
}

impl Default for YieldSurface {
    fn default() -> Self {
        YieldSurface::Ball { radius: 0.05 }
    }
}

impl YieldSurface {
    pub fn ball(radius: f64) -> Result<Self> {
        let z = YieldSurface::Ball { radius };
        z.validate()?;
        Ok(z)
    }

    pub fn cylinder(radius: f64, trace_bound: Option<f64>) -> Result<Self> {
        let z = YieldSurface::VonMisesCylinder {
            radius,
            trace_bound,
        };
        z.validate()?;
        Ok(z)
    }

    pub fn validate(&self) -> Result<()> {
        let (radius, bound) = match *self {
            YieldSurface::Ball { radius } => (radius, None),
            YieldSurface::VonMisesCylinder {
                radius,
                trace_bound,
            } => (radius, trace_bound),
        };
        if !(radius > 0.0) {
            return Err(invalid_param(format!("yield radius must be positive, got {radius}")));
        }
        if let Some(b) = bound {
            if !(b > 0.0) {
                return Err(invalid_param(format!("trace bound must be positive, got {b}")));
            }
        }
        Ok(())
    }

    pub fn radius(&self) -> f64 {
        match *self {
            YieldSurface::Ball { radius } | YieldSurface::VonMisesCylinder { radius, .. } => radius,
        }
    }

    /// Closest point of `Z` in the Frobenius metric.
    pub fn project(&self, tau: &SymTensor) -> SymTensor {
        match *self {
            YieldSurface::Ball { radius } => {
                let n = tau.norm();
                if n <= radius {
                    *tau
                } else {
                    *tau * (radius / n)
                }
            }
            YieldSurface::VonMisesCylinder {
                radius,
                trace_bound,
            } => {
                let dev = tau.deviator();
                let n = dev.norm();
                let dev = if n <= radius { dev } else { dev * (radius / n) };
                let mut tr = tau.trace();
                if let Some(b) = trace_bound {
                    tr = tr.clamp(-b, b);
                }
                dev + SymTensor::IDENTITY * (tr / 3.0)
            }
        }
    }

    /// How far `s` lies outside `Z` (nonpositive inside).
    pub fn excess(&self, s: &SymTensor) -> f64 {
        match *self {
            YieldSurface::Ball { radius } => s.norm() - radius,
            YieldSurface::VonMisesCylinder {
                radius,
                trace_bound,
            } => {
                let d = s.deviator().norm() - radius;
                match trace_bound {
                    Some(b) => d.max(s.trace().abs() - b),
                    None => d,
                }
            }
        }
    }

    /// Support function `sup_{z in Z} z : d`.
    ///
    /// For an unbounded cylinder the value is infinite unless `d` is
    /// deviatoric; a trace part beyond a relative tolerance is reported as
    /// an inconsistency.
    pub fn support(&self, d: &SymTensor) -> Result<f64> {
        match *self {
            YieldSurface::Ball { radius } => Ok(radius * d.norm()),
            YieldSurface::VonMisesCylinder {
                radius,
                trace_bound,
            } => {
                let dev = radius * d.deviator().norm();
                let tr = d.trace();
                match trace_bound {
                    Some(b) => Ok(dev + b * tr.abs() / 3.0),
                    None => {
                        if tr.abs() > 1e-10 * d.norm() {
                            Err(Error::FlaggedInconsistency(format!(
                                "plastic flow has trace {tr:e} on an unbounded cylinder"
                            )))
                        } else {
                            Ok(dev)
                        }
                    }
                }
            }
        }
    }
}

/// Free function form of [`YieldSurface::project`].
pub fn project_z(tau: &SymTensor, z: &YieldSurface) -> SymTensor {
    z.project(tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_projection_scales_radially() {
        let z = YieldSurface::ball(1.0).unwrap();
        assert_eq!(z.project(&SymTensor::diag(2.0, 0.0, 0.0)), SymTensor::diag(1.0, 0.0, 0.0));
        let inside = SymTensor([0.1, -0.2, 0.3, 0.05, 0.0, 0.1]);
        assert_eq!(z.project(&inside), inside);
    }

    #[test]
    fn cylinder_keeps_or_clamps_trace() {
        let z = YieldSurface::cylinder(1.0, None).unwrap();
        let tau = SymTensor([3.0, -1.0, 1.0, 0.5, 0.0, 0.2]);
        let s = z.project(&tau);
        assert!((s.trace() - tau.trace()).abs() < 1e-14);
        assert!((s.deviator().norm() - 1.0).abs() < 1e-14);
        let zb = YieldSurface::cylinder(1.0, Some(0.5)).unwrap();
        assert!((zb.project(&tau).trace() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn unbounded_cylinder_flags_trace_flow() {
        let z = YieldSurface::cylinder(1.0, None).unwrap();
        assert!(z.support(&SymTensor::diag(1.0, 1.0, 1.0)).is_err());
        assert!(z.support(&SymTensor::diag(1.0, -1.0, 0.0)).is_ok());
    }

    #[test]
    fn rejects_nonpositive_radius() {
        assert!(YieldSurface::ball(0.0).is_err());
        assert!(YieldSurface::cylinder(1.0, Some(-1.0)).is_err());
    }
}
