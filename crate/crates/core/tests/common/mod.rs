//! Oracles shared by the hysteresis tests and the acceptance target.
#![allow(dead_code)]

use freezethaw::hysteresis::{play_init, play_step};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Brute-force play oracle: the input is refined into `sub` linear substeps
/// per segment and, at every substep, the memory is moved by the smallest
/// amount that restores `|p - xi| <= r`. Complementarity is checked on the
/// way: the memory only moves while the constraint is active, and then in
/// the direction of the input.
pub fn vi_oracle(knots: &[f64], r: f64, sub: usize) -> Vec<f64> {
    let mut xi = if knots[0] - r > 0.0 {
        knots[0] - r
    } else if knots[0] + r < 0.0 {
        knots[0] + r
    } else {
        0.0
    };
    let mut out = vec![xi];
    for w in knots.windows(2) {
        for k in 1..=sub {
            let p = w[0] + (w[1] - w[0]) * k as f64 / sub as f64;
            let before = xi;
            if p - xi > r {
                xi = p - r;
            } else if xi - p > r {
                xi = p + r;
            }
            let moved = xi - before;
            if moved != 0.0 {
                assert!(((p - xi).abs() - r).abs() < 1e-9, "moved off the band boundary");
                assert!(moved * (w[1] - w[0]) > 0.0, "moved against the input");
            }
        }
        out.push(xi);
    }
    out
}

pub fn random_input(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.random_range(5..30);
    let mut knots = vec![rng.random_range(-2.0..2.0)];
    for _ in 0..n {
        knots.push(rng.random_range(-3.0..3.0));
    }
    knots
}

pub fn play_chain(knots: &[f64], r: f64) -> Vec<f64> {
    let mut xi = play_init(knots[0], r).unwrap();
    let mut out = vec![xi];
    for p in &knots[1..] {
        xi = play_step(xi, *p, r).unwrap();
        out.push(xi);
    }
    out
}
