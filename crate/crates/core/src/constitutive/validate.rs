//! Numerical check of every structural assumption on the material data.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::laws::{MaterialLaws, SaturationLaw};
use crate::plasticity::{Isotropic4, SymTensor};

/// Outcome of one clause.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseResult {
    pub clause: String,
    pub description: String,
    pub passed: bool,
    pub witness: Option<String>,
}

/// Clause-by-clause validation report.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct HypothesisReport {
    pub clauses: Vec<ClauseResult>,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn clause(&self, id: &str) -> Option<&ClauseResult> {
        self.clauses.iter().find(|c| c.clause == id)
    }

    pub fn failed(&self) -> impl Iterator<Item = &ClauseResult> {
        self.clauses.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, clause: &str, description: &str, witness: Option<String>) {
        self.clauses.push(ClauseResult {
            clause: clause.to_string(),
            description: description.to_string(),
            passed: witness.is_none(),
            witness,
        });
    }
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            write!(f, "{tag} {:<22} {}", c.clause, c.description)?;
            if let Some(w) = &c.witness {
                write!(f, ": {w}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Sampled extrema of the boundary, initial and load data.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSamples {
    pub gravity: Vec<f64>,
    pub alpha_min: f64,
    pub alpha_total: f64,
    pub omega_min: f64,
    pub omega_total: f64,
    pub p_star_max_abs: f64,
    pub theta_star_min: f64,
    pub p0_max_abs: f64,
    pub theta0_min: f64,
    pub chi0_min: f64,
    pub chi0_max: f64,
}

fn first_failure<I: IntoIterator<Item = f64>>(
    xs: I,
    ok: impl Fn(f64) -> bool,
    what: impl Fn(f64) -> String,
) -> Option<String> {
    xs.into_iter().find(|x| !ok(*x)).map(what)
}

fn theta_samples() -> Vec<f64> {
    let mut v: Vec<f64> = (0..=200).map(|k| k as f64 * 0.05).collect();
    v.extend((0..=120).map(|k| 10f64.powf(-6.0 + k as f64 * 0.1)));
    v
}

fn p_samples() -> Vec<f64> {
    let pos: Vec<f64> = (0..=120).map(|k| 10f64.powf(-6.0 + k as f64 * 0.1)).collect();
    let mut v = vec![0.0];
    v.extend(pos.iter().copied());
    v.extend(pos.iter().map(|x| -x));
    v.extend((-100..=100).map(|k| k as f64 * 0.05));
    v
}

fn tensor_clause(name: &str, c: &Isotropic4, bound: f64, rng: &mut ChaCha8Rng) -> Option<String> {
    if !c.is_positive_definite() {
        return Some(format!("{name} is not positive definite (bulk {}, shear {})", c.bulk, c.shear));
    }
    for _ in 0..200 {
        let xi = SymTensor(std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
        let lhs = c.quadratic(&xi);
        let rhs = bound * xi.dot(&xi);
        if lhs < rhs * (1.0 - 1e-12) {
            return Some(format!("{name} xi:xi = {lhs} < {rhs} at xi = {:?}", xi.0));
        }
    }
    None
}

/// Checks the hypotheses on the laws and, when given, on the data.
pub fn validate_hypotheses(laws: &MaterialLaws, data: Option<&DataSamples>) -> HypothesisReport {
    let mut rep = HypothesisReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let k = &laws.constants;

    // (i) tensors
    let t = &laws.tensors;
    let a_flat = t.a_flat();
    let w = tensor_clause("Ah", &t.ah, a_flat, &mut rng)
        .or_else(|| tensor_clause("Ae", &t.ae, a_flat, &mut rng))
        .or_else(|| tensor_clause("B", &t.b, t.b_flat(), &mut rng));
    rep.push("(i)", "Ah, Ae, B symmetric positive definite", w);

    // (ii)-(v) data
    match data {
        Some(d) => {
            let w = d
                .gravity
                .iter()
                .find(|g| !g.is_finite())
                .map(|g| format!("gravity component {g} is not finite"));
            rep.push("(ii)", "volume force is a bounded gradient field", w);

            let w = if !(d.alpha_min >= 0.0) {
                Some(format!("alpha takes the negative value {}", d.alpha_min))
            } else if !(d.omega_min >= 0.0) {
                Some(format!("omega takes the negative value {}", d.omega_min))
            } else if !(d.alpha_total > 0.0) {
                Some(format!("boundary integral of alpha is {}", d.alpha_total))
            } else if !(d.omega_total > 0.0) {
                Some(format!("boundary integral of omega is {}", d.omega_total))
            } else {
                None
            };
            rep.push("(iii)", "alpha, omega >= 0 with positive boundary integral", w);

            let w = if !d.p_star_max_abs.is_finite() {
                Some("outer pressure is unbounded".to_string())
            } else if !(d.theta_star_min >= k.theta_bar) {
                Some(format!(
                    "outer temperature {} below theta_bar = {}",
                    d.theta_star_min, k.theta_bar
                ))
            } else {
                None
            };
            rep.push("(iv)", "outer data bounded, theta* >= theta_bar", w);

            let w = if !d.p0_max_abs.is_finite() {
                Some("initial pressure is unbounded".to_string())
            } else if !(d.theta0_min >= k.theta_bar) {
                Some(format!(
                    "initial temperature {} below theta_bar = {}",
                    d.theta0_min, k.theta_bar
                ))
            } else if !(d.chi0_min >= 0.0 && d.chi0_max <= 1.0) {
                Some(format!("initial chi range [{}, {}] leaves [0, 1]", d.chi0_min, d.chi0_max))
            } else {
                None
            };
            rep.push("(v)", "initial data: theta0 >= theta_bar, chi0 in [0, 1]", w);
        }
        None => {
            for (id, what) in [
                ("(ii)", "volume force (no data supplied)"),
                ("(iii)", "boundary coefficients (no data supplied)"),
                ("(iv)", "outer data (no data supplied)"),
                ("(v)", "initial data (no data supplied)"),
            ] {
                rep.push(id, what, None);
            }
        }
    }

    // (vi) saturation law
    let (c_plus, c_minus) = laws.density.saturation_constants();
    let w = match laws.saturation {
        SaturationLaw::Envelope {
            c0,
            f_flat,
            f_sharp,
            nu,
        } => {
            if !(nu > 0.0 && nu <= 0.5) {
                Some(format!("nu in (0, 1/2] violated: nu = {nu}"))
            } else if !(f_sharp > f_flat && f_flat > 0.0) {
                Some(format!("f_sharp > f_flat > 0 violated: f_flat = {f_flat}, f_sharp = {f_sharp}"))
            } else {
                let f = &laws.saturation;
                let (lo, hi) = f.range();
                if lo < c_minus || hi > 1.0 - c_plus || !c0.is_finite() {
                    Some(format!(
                        "range ({lo}, {hi}) of f not inside ({c_minus}, {})",
                        1.0 - c_plus
                    ))
                } else {
                    first_failure(
                        p_samples(),
                        |p| {
                            let d = f.derivative(p);
                            d >= f_flat * (1.0 + p.abs()).powf(-1.0 - nu) * (1.0 - 1e-12)
                                && d <= f_sharp
                        },
                        |p| format!("derivative bound fails at p = {p}"),
                    )
                }
            }
        }
        SaturationLaw::Linear { slope, .. } => Some(format!(
            "linear saturation law with slope {slope} is unbounded, range not inside ({c_minus}, {})",
            1.0 - c_plus
        )),
    };
    rep.push("(vi)", "f bounded, monotone, with envelope growth", w);

    // (vii) mobility
    let mu = &laws.mobility;
    let w = if !(mu.mu_flat > 0.0 && mu.modulation >= 0.0) {
        Some(format!(
            "mu_flat > 0 and modulation >= 0 violated: {} / {}",
            mu.mu_flat, mu.modulation
        ))
    } else {
        first_failure(
            p_samples(),
            |p| mu.value(p) >= mu.mu_flat,
            |p| format!("mu({p}) < mu_flat"),
        )
    };
    rep.push("(vii)", "mu >= mu_flat > 0", w);

    // (viii) heat capacity
    let c = &laws.heat_capacity;
    let w = if !(0.5 <= c.b && c.b < c.b_hat && c.b_hat < 1.0) {
        let broken = if c.b < 0.5 {
            "1/2 <= b"
        } else if c.b >= c.b_hat {
            "b < b_hat"
        } else {
            "b_hat < 1"
        };
        Some(format!(
            "exponent chain 1/2 <= b < b_hat < 1 violated ({broken}): b = {}, b_hat = {}",
            c.b, c.b_hat
        ))
    } else if !(c.c_sharp > c.c_flat && c.c_flat > 0.0) {
        Some(format!("c_sharp > c_flat > 0 violated: {} / {}", c.c_flat, c.c_sharp))
    } else {
        first_failure(
            theta_samples(),
            |th| {
                let v = c.value(th);
                v >= c.c_flat * (1.0 + th.powf(c.b)) * (1.0 - 1e-12)
                    && v <= c.c_sharp * (1.0 + th.powf(c.b_hat))
            },
            |th| format!("c_V bounds fail at theta = {th}"),
        )
    };
    rep.push("(viii)", "c_V between c_flat(1+theta^b) and c_sharp(1+theta^b_hat)", w);

    // (ix) conductivity
    let kap = &laws.conductivity;
    let a_cap = (8.0 + 3.0 * kap.a + 2.0 * c.b) * (1.0 + c.b) / (7.0 - 2.0 * c.b);
    let w = if !(kap.a > 0.0 && kap.a < 1.0 - c.b) {
        Some(format!("0 < a < 1 - b violated: a = {}, b = {}", kap.a, c.b))
    } else if !(kap.a < kap.a_hat && kap.a_hat < a_cap) {
        Some(format!(
            "a < a_hat < (8+3a+2b)(1+b)/(7-2b) = {a_cap} violated: a = {}, a_hat = {}",
            kap.a, kap.a_hat
        ))
    } else if !(kap.kappa_sharp > kap.kappa_flat && kap.kappa_flat > 0.0) {
        Some(format!(
            "kappa_sharp > kappa_flat > 0 violated: {} / {}",
            kap.kappa_flat, kap.kappa_sharp
        ))
    } else {
        first_failure(
            theta_samples(),
            |th| {
                let v = kap.value(th);
                v >= kap.kappa_flat * (1.0 + th.powf(1.0 + kap.a)) * (1.0 - 1e-12)
                    && v <= kap.kappa_sharp * (1.0 + th.powf(1.0 + kap.a_hat))
            },
            |th| format!("kappa bounds fail at theta = {th}"),
        )
    };
    rep.push("(ix)", "kappa growth between exponents a and a_hat", w);

    // (x) relaxation
    let g = &laws.relaxation;
    let w = if !(g.gamma_sharp > g.gamma_flat && g.gamma_flat > 0.0) {
        Some(format!(
            "gamma_sharp > gamma_flat > 0 violated: {} / {}",
            g.gamma_flat, g.gamma_sharp
        ))
    } else {
        let mut witness = None;
        'outer: for th in theta_samples().into_iter().step_by(7) {
            for d in [-10.0, -1.0, 0.0, 0.3, 2.0, 50.0] {
                let v = g.value(th, d);
                let base = 1.0 + th + d * d;
                if v < g.gamma_flat * base * (1.0 - 1e-12) || v > g.gamma_sharp * base {
                    witness = Some(format!("gamma bounds fail at theta = {th}, div u = {d}"));
                    break 'outer;
                }
            }
        }
        witness
    };
    rep.push("(x)", "gamma comparable to 1 + theta + (div u)^2", w);

    // (xi) plasticity
    let w = if let Err(e) = laws.yield_surface.validate() {
        Some(e.to_string())
    } else if let Err(e) = laws.tensors.ae_scalar() {
        Some(e.to_string())
    } else if laws.yield_surface.excess(&SymTensor::ZERO) >= 0.0 {
        Some("0 is not an interior point of Z".to_string())
    } else {
        None
    };
    rep.push("(xi)", "stop operator on a convex Z with 0 in its interior", w);

    // physical constants
    let w = k.validate().err().map(|e| e.to_string());
    rep.push("constants", "rho_star in (0,1); L, theta_c, theta_bar > 0", w);

    // Preisach density
    let dens = &laws.density;
    let (r0, r1) = dens.r_support();
    let mut w = None;
    if !dens.c_star().is_finite() {
        w = Some("C_psi* is not finite".to_string());
    } else {
        'outer: for i in 0..=40 {
            let r = r0 + (r1 - r0) * i as f64 / 40.0;
            let env = dens.envelope(r);
            for j in 0..=80 {
                let v = -20.0 + 40.0 * j as f64 / 80.0;
                let x = dens.value(r, v);
                if !(x >= 0.0 && x <= env) {
                    w = Some(format!("psi({r}, {v}) = {x} outside [0, {env}]"));
                    break 'outer;
                }
            }
        }
    }
    rep.push("density-envelope", "0 <= psi <= psi*, C_psi* finite", w);

    let w = if !(c_plus > 0.0 && c_plus < 0.5) {
        Some(format!("0 < C_psi+ < 1/2 violated: C_psi+ = {c_plus}"))
    } else if !(c_minus > 0.0 && c_minus < 0.5) {
        Some(format!("0 < C_psi- < 1/2 violated: C_psi- = {c_minus}"))
    } else {
        None
    };
    rep.push("saturation-constants", "0 < C_psi+, C_psi- < 1/2", w);

    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass() {
        let rep = validate_hypotheses(&MaterialLaws::default(), None);
        assert!(rep.all_passed(), "{rep}");
    }

    #[test]
    fn seeded_violations_name_their_clause() {
        let mut laws = MaterialLaws::default();
        laws.saturation = SaturationLaw::Envelope { c0: 0.5, f_flat: 0.15, f_sharp: 0.2, nu: 0.9 };
        let rep = validate_hypotheses(&laws, None);
        assert!(!rep.clause("(vi)").unwrap().passed);

        let mut laws = MaterialLaws::default();
        laws.heat_capacity.b = 1.2;
        let rep = validate_hypotheses(&laws, None);
        let c = rep.clause("(viii)").unwrap();
        assert!(!c.passed);
        assert!(c.witness.as_ref().unwrap().contains("b < b_hat"));

        let mut laws = MaterialLaws::default();
        laws.density = laws.density.scaled(3.0).unwrap();
        let rep = validate_hypotheses(&laws, None);
        assert!(!rep.clause("saturation-constants").unwrap().passed);
    }
}
