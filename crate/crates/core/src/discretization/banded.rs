//! Banded matrices with an unpivoted LU solver.
//!
//! Every system assembled here is either symmetric positive definite or
//! diagonally dominant by columns, so elimination without pivoting is
//! stable; a vanishing pivot is reported instead of silently continuing.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    // row i stores columns i - bw ..= i + bw
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandMatrix {
            n,
            bw,
            data: vec![0.0; n * (2 * bw + 1)],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i.abs_diff(j) <= self.bw, "entry ({i}, {j}) outside band {}", self.bw);
        i * (2 * self.bw + 1) + (j + self.bw - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add_diagonal(&mut self, d: &[f64]) {
        for (i, v) in d.iter().enumerate() {
            self.add(i, i, *v);
        }
    }

    /// `self + s * other` for matrices of equal size and bandwidth.
    pub fn add_scaled(&mut self, s: f64, other: &BandMatrix) {
        assert_eq!((self.n, self.bw), (other.n, other.bw));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn scaled(&self, s: f64) -> BandMatrix {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|x| *x *= s);
        m
    }

    /// Multiplies column `j` by `d[j]`.
    pub fn scale_columns(&mut self, d: &[f64]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let hi = (i + self.bw).min(self.n - 1);
            for j in lo..=hi {
                let k = self.idx(i, j);
                self.data[k] *= d[j];
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let hi = (i + self.bw).min(self.n - 1);
            let base = i * (2 * self.bw + 1) + self.bw - i;
            let mut s = 0.0;
            for j in lo..=hi {
                s += self.data[base + j] * x[j];
            }
            y[i] = s;
        }
    }

    /// `x^T A x`.
    pub fn quadratic(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in i + 1..=(i + self.bw).min(self.n.saturating_sub(1)) {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }

    /// Row-major dense copy (for small problems and tests).
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// In-place LU factorization without pivoting.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let bw = self.bw;
        let w = 2 * bw + 1;
        let scale = self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        for k in 0..n {
            let pivot = self.data[k * w + bw];
            if !(pivot.abs() > 1e-14 * scale) || !pivot.is_finite() {
                return Err(Error::StepFailure(format!(
                    "singular banded system: pivot {pivot:e} at row {k}"
                )));
            }
            let hi = (k + bw).min(n - 1);
            for i in k + 1..=hi {
                let ik = i * w + (k + bw - i);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=hi {
                        let ij = i * w + (j + bw - i);
                        let kj = k * w + (j + bw - k);
                        self.data[ij] -= l * self.data[kj];
                    }
                }
            }
        }
        Ok(BandLu { m: self })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.clone().factor()?.solve(rhs)
    }
}

/// Factorized band matrix.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
}

impl BandLu {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.m.n;
        let bw = self.m.bw;
        let w = 2 * bw + 1;
        let d = &self.m.data;
        let mut x = rhs.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = x[i];
            for j in lo..i {
                s -= d[i * w + (j + bw - i)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=hi {
                s -= d[i * w + (j + bw - i)] * x[j];
            }
            x[i] = s / d[i * w + bw];
        }
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(Error::StepFailure("non-finite solution of banded system".into()))
        }
    }
}
