//! Symmetric 3x3 tensors and isotropic fourth-order tensors.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};

/// Symmetric tensor stored as `[xx, yy, zz, yz, xz, xy]`.
///
/// The off-diagonal entries carry weight 2 in the inner product, so
/// [`SymTensor::dot`] is the Frobenius product of the full matrices.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor(pub [f64; 6]);

const WEIGHTS: [f64; 6] = [1.0, 1.0, 1.0, 2.0, 2.0, 2.0];

impl SymTensor {
    pub const ZERO: SymTensor = SymTensor([0.0; 6]);
    pub const IDENTITY: SymTensor = SymTensor([1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        SymTensor([a, b, c, 0.0, 0.0, 0.0])
    }

    /// One-dimensional strain `diag(e, 0, 0)`.
    pub fn uniaxial(e: f64) -> Self {
        SymTensor::diag(e, 0.0, 0.0)
    }

    /// Plane strain tensor with in-plane components only.
    pub fn plane(xx: f64, yy: f64, xy: f64) -> Self {
        SymTensor([xx, yy, 0.0, 0.0, 0.0, xy])
    }

    pub fn from_matrix(m: [[f64; 3]; 3]) -> Self {
        SymTensor([
            m[0][0],
            m[1][1],
            m[2][2],
            0.5 * (m[1][2] + m[2][1]),
            0.5 * (m[0][2] + m[2][0]),
            0.5 * (m[0][1] + m[1][0]),
        ])
    }

    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        let [xx, yy, zz, yz, xz, xy] = self.0;
        [[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]]
    }

    pub fn dot(&self, other: &SymTensor) -> f64 {
        (0..6).map(|k| WEIGHTS[k] * self.0[k] * other.0[k]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn deviator(&self) -> SymTensor {
        let m = self.trace() / 3.0;
        let mut d = *self;
        for k in 0..3 {
            d.0[k] -= m;
        }
        d
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Add for SymTensor {
    type Output = SymTensor;
    fn add(mut self, rhs: SymTensor) -> SymTensor {
        self += rhs;
        self
    }
}

impl AddAssign for SymTensor {
    fn add_assign(&mut self, rhs: SymTensor) {
        for k in 0..6 {
            self.0[k] += rhs.0[k];
        }
    }
}

impl Sub for SymTensor {
    type Output = SymTensor;
    fn sub(mut self, rhs: SymTensor) -> SymTensor {
        for k in 0..6 {
            self.0[k] -= rhs.0[k];
        }
        self
    }
}

impl Neg for SymTensor {
    type Output = SymTensor;
    fn neg(self) -> SymTensor {
        self * -1.0
    }
}

impl Mul<f64> for SymTensor {
    type Output = SymTensor;
    fn mul(mut self, s: f64) -> SymTensor {
        for x in self.0.iter_mut() {
            *x *= s;
        }
        self
    }
}

/// Isotropic tensor `C t = K tr(t) I + 2 G dev(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Isotropic4 {
    pub bulk: f64,
    pub shear: f64,
}

impl Isotropic4 {
    pub fn new(bulk: f64, shear: f64) -> Result<Self> {
        if !(bulk >= 0.0 && shear >= 0.0 && bulk.is_finite() && shear.is_finite()) {
            return Err(invalid_param(format!(
                "isotropic tensor needs nonnegative moduli, got bulk {bulk}, shear {shear}"
            )));
        }
        Ok(Isotropic4 { bulk, shear })
    }

    /// The tensor `c` times the identity.
    pub fn scalar(c: f64) -> Result<Self> {
        Isotropic4::new(c / 3.0, c / 2.0)
    }

    pub fn apply(&self, t: &SymTensor) -> SymTensor {
        SymTensor::IDENTITY * (self.bulk * t.trace()) + t.deviator() * (2.0 * self.shear)
    }

    pub fn apply_inverse(&self, t: &SymTensor) -> SymTensor {
        SymTensor::IDENTITY * (t.trace() / (9.0 * self.bulk)) + t.deviator() * (0.5 / self.shear)
    }

    /// `C t : t`.
    pub fn quadratic(&self, t: &SymTensor) -> f64 {
        let tr = t.trace();
        let dev = t.deviator();
        self.bulk * tr * tr + 2.0 * self.shear * dev.dot(&dev)
    }

    /// `C^{-1} t : t`.
    pub fn inverse_quadratic(&self, t: &SymTensor) -> f64 {
        let tr = t.trace();
        let dev = t.deviator();
        tr * tr / (9.0 * self.bulk) + dev.dot(&dev) / (2.0 * self.shear)
    }

    /// Smallest eigenvalue, the coercivity constant on all symmetric tensors.
    pub fn min_eigenvalue(&self) -> f64 {
        (3.0 * self.bulk).min(2.0 * self.shear)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        (3.0 * self.bulk).max(2.0 * self.shear)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }

    /// Multiplier `c` when the tensor equals `c` times the identity.
    pub fn as_scalar(&self) -> Option<f64> {
        let (a, b) = (3.0 * self.bulk, 2.0 * self.shear);
        ((a - b).abs() <= 1e-12 * a.max(b)).then_some(b)
    }

    /// Modulus seen by a uniaxial strain `diag(e, 0, 0)`.
    pub fn uniaxial_modulus(&self) -> f64 {
        self.bulk + 4.0 * self.shear / 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_is_frobenius() {
        let a = SymTensor([1.0, 2.0, 3.0, 0.5, -0.25, 0.75]);
        let b = SymTensor([-1.0, 0.5, 2.0, 1.5, 1.0, -2.0]);
        let (ma, mb) = (a.to_matrix(), b.to_matrix());
        let mut f = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                f += ma[i][j] * mb[i][j];
            }
        }
        assert!((a.dot(&b) - f).abs() < 1e-14);
        assert_eq!(SymTensor::from_matrix(ma), a);
    }

    #[test]
    fn inverse_round_trip() {
        let c = Isotropic4::new(2.0, 0.7).unwrap();
        let t = SymTensor([1.0, -2.0, 0.3, 0.1, 0.2, -0.4]);
        let back = c.apply_inverse(&c.apply(&t));
        assert!((back - t).norm() < 1e-14);
        assert!((c.quadratic(&t) - c.apply(&t).dot(&t)).abs() < 1e-13);
        assert!((c.inverse_quadratic(&t) - c.apply_inverse(&t).dot(&t)).abs() < 1e-13);
    }

    #[test]
    fn scalar_tensor() {
        let c = Isotropic4::scalar(3.0).unwrap();
        let t = SymTensor([1.0, -2.0, 0.3, 0.1, 0.2, -0.4]);
        assert!((c.apply(&t) - t * 3.0).norm() < 1e-14);
        assert_eq!(c.as_scalar(), Some(3.0));
        assert!((c.uniaxial_modulus() - 3.0).abs() < 1e-15);
        assert_eq!(Isotropic4::new(1.0, 1.0).unwrap().as_scalar(), None);
    }
}
