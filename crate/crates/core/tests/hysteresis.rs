use freezethaw::constitutive::SaturationLaw;
use freezethaw::hysteresis::*;
use freezethaw::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{play_chain, random_input, vi_oracle};

#[test]
fn play_examples() {
    assert_eq!(play_init(0.5, 1.0).unwrap(), 0.0);
    assert_eq!(play_init(2.0, 1.0).unwrap(), 1.0);
    assert_eq!(play_init(-3.0, 1.0).unwrap(), -2.0);
    assert!(matches!(play_init(1.0, -0.1), Err(Error::InvalidParameter(_))));
    assert_eq!(play_step(0.0, 0.5, 1.0).unwrap(), 0.0);

    let up = vi_oracle(&[0.0, 2.0], 1.0, 10_000);
    assert_eq!(play_step(0.0, 2.0, 1.0).unwrap(), 1.0);
    assert!((up[1] - 1.0).abs() < 1e-12);
    // start from memory 0.5 with input 0.5 inside the band, then descend
    let mut xi = 0.5;
    let mut p = 0.5;
    for k in 1..=10_000 {
        p = 0.5 - 2.5 * k as f64 / 10_000.0;
        if xi - p > 1.0 {
            xi = p + 1.0;
        }
    }
    assert_eq!(p, -2.0);
    assert!((xi + 1.0).abs() < 1e-12);
    assert_eq!(play_step(0.5, -2.0, 1.0).unwrap(), -1.0);
}

#[test]
fn play_chain_matches_vi_oracle_on_100_inputs() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = RGrid::midpoint(0.0, 2.0, 16).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let knots = random_input(&mut rng);
        for &r in grid.levels() {
            let a = play_chain(&knots, r);
            let b = vi_oracle(&knots, r, 2000);
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    assert!(worst <= 1e-12, "max deviation {worst}");
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn uniform_density_closed_forms_at_fine_grid() {
    let n = 1000;
    let dens = PreisachDensity::default_box();
    let grid = RGrid::for_density(&dens, n).unwrap();
    let mut bank = PlayBank::init(0.0, &grid);
    let inc = preisach_step(&mut bank, 1.0, &dens, &grid).unwrap();

    // fine trapezoid oracles of the closed forms
    let trap = |f: &dyn Fn(f64) -> f64| {
        let m = 200_000;
        let h = 1.0 / m as f64;
        (0..=m)
            .map(|k| {
                let w = if k == 0 || k == m { 0.5 } else { 1.0 };
                w * f(k as f64 * h)
            })
            .sum::<f64>()
            * h
    };
    let g_oracle = trap(&|r| 0.2 * (1.0 - r).max(0.0));
    let u_oracle = trap(&|r| 0.2 * (1.0 - r).powi(2) / 2.0);
    let d_oracle = trap(&|r| 0.2 * r * (1.0 - r));
    assert!((g_oracle - 0.1).abs() < 1e-9);
    assert!((u_oracle - 0.2 / 6.0).abs() < 1e-9);
    assert!((d_oracle - 0.2 / 6.0).abs() < 1e-9);

    let tol = 2.0 / n as f64;
    let g0 = preisach_eval(&bank, &dens, &grid).unwrap();
    assert!((g0 - g_oracle).abs() <= tol * g_oracle);
    assert!((inc.d_g0 - g_oracle).abs() <= tol * g_oracle);
    assert!((inc.d_u0 - u_oracle).abs() <= tol * u_oracle, "{}", inc.d_u0);
    assert!((inc.d_d0_abs - d_oracle).abs() <= tol * d_oracle, "{}", inc.d_d0_abs);
    let u0 = preisach_potential(&bank, &dens, &grid).unwrap();
    assert!((u0 - u_oracle).abs() <= tol * u_oracle);

    // modified potentials
    assert_eq!(modified_potential(&bank, &dens, &grid, &|_| 0.0).unwrap(), 0.0);
    let id = modified_potential(&bank, &dens, &grid, &|v| v).unwrap();
    assert!((id - u_oracle).abs() <= tol * u_oracle);
    let pos = modified_potential(&bank, &dens, &grid, &|v: f64| v.max(0.0)).unwrap();
    assert!((pos - u0).abs() < 1e-14);
}

#[test]
fn g_eval_examples() {
    let dens = PreisachDensity::default_box();
    let grid = RGrid::for_density(&dens, 64).unwrap();
    let f = SaturationLaw::default();
    let bank = PlayBank::init(0.0, &grid);
    assert_eq!(g_eval(0.0, &bank, &dens, &grid, &f).unwrap(), 0.5);
    let (c_plus, c_minus) = dens.saturation_constants();
    assert!((c_plus - 0.2).abs() < 1e-15 && (c_minus - 0.2).abs() < 1e-15);
    let (lo, _) = f.range();
    // f maps into (C_psi-, 1 - C_psi+), so G stays inside (0, 1)
    assert!(lo - c_minus >= 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bank = bank;
    for _ in 0..500 {
        let p = rng.random_range(-50.0..50.0);
        preisach_step(&mut bank, p, &dens, &grid).unwrap();
        let g = g_eval(p, &bank, &dens, &grid, &f).unwrap();
        assert!(g > 0.0 && g < 1.0);
    }
}

fn densities() -> Vec<PreisachDensity> {
    vec![
        PreisachDensity::default_box(),
        PreisachDensity::Table(
            DensityTable::new((0.0, 1.5), (-1.0, 2.0), 3, 4, vec![0.1, 0.0, 0.3, 0.05, 0.2, 0.1, 0.0, 0.4, 0.02, 0.3, 0.1, 0.1])
                .unwrap(),
        ),
        PreisachDensity::separable_exp(0.3, 0.4, 0.5).unwrap(),
    ]
}

#[test]
fn energy_identity_per_step_random_histories() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dens in densities() {
        let grid = RGrid::for_density(&dens, 64).unwrap();
        for _ in 0..20 {
            let knots = random_input(&mut rng);
            let mut bank = PlayBank::init(knots[0], &grid);
            for p in &knots[1..] {
                let inc = preisach_step(&mut bank, *p, &dens, &grid).unwrap();
                assert!(inc.identity_residual().abs() <= 1e-12, "residual {}", inc.identity_residual());
                assert!(inc.d_d0_abs >= 0.0);
                assert!(inc.endpoint_excess() >= -1e-12);
            }
        }
    }
}

#[test]
fn lipschitz_bound_on_100_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dens = PreisachDensity::default_box();
    let grid = RGrid::for_density(&dens, 64).unwrap();
    let c_star = dens.c_star();
    for _ in 0..100 {
        let n = rng.random_range(5..40);
        let p0: f64 = rng.random_range(-1.0..1.0);
        let mut b1 = PlayBank::init(p0, &grid);
        let mut b2 = b1.clone();
        let mut running: f64 = 0.0;
        for _ in 0..n {
            let p1: f64 = rng.random_range(-3.0..3.0);
            let p2 = p1 + rng.random_range(-0.5..0.5);
            running = running.max((p1 - p2).abs());
            preisach_step(&mut b1, p1, &dens, &grid).unwrap();
            preisach_step(&mut b2, p2, &dens, &grid).unwrap();
            // exact up to the rounding of p +- r in the play update
            let slack = 4.0 * f64::EPSILON * (3.5 + 1.0);
            for (x, y) in b1.xi.iter().zip(&b2.xi) {
                assert!((x - y).abs() <= running + slack, "{} > {running}", (x - y).abs());
            }
            let g1 = preisach_eval(&b1, &dens, &grid).unwrap();
            let g2 = preisach_eval(&b2, &dens, &grid).unwrap();
            assert!((g1 - g2).abs() <= c_star * running + 1e-15);
        }
    }
}

#[test]
fn potential_and_dissipation_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for dens in densities() {
        let grid = RGrid::for_density(&dens, 64).unwrap();
        let c_star = dens.c_star();
        // saturation constants of the discretized density
        let c_plus: f64 = grid.levels().iter().zip(grid.weights()).map(|(r, w)| w * dens.cum0(*r, 1e3)).sum();
        let c_minus: f64 = grid.levels().iter().zip(grid.weights()).map(|(r, w)| -w * dens.cum0(*r, -1e3)).sum();
        let lip = grid.dissipation_lipschitz(&dens);
        let mut bank = PlayBank::init(0.0, &grid);
        let mut p_prev = 0.0;
        for _ in 0..300 {
            let p: f64 = rng.random_range(-4.0..4.0);
            let old = bank.xi.clone();
            let inc = preisach_step(&mut bank, p, &dens, &grid).unwrap();
            let u0 = preisach_potential(&bank, &dens, &grid).unwrap();
            assert!(u0 >= 0.0 && u0 <= c_star * (1.0 + p.abs()).powi(2));
            assert!(inc.d_d0_abs <= lip * (p - p_prev).abs() * (1.0 + 1e-12));
            let g0 = preisach_eval(&bank, &dens, &grid).unwrap();
            // the midpoint grid integrates a piecewise-constant density exactly
            assert!(g0 <= c_plus * (1.0 + 1e-12) && g0 >= -c_minus * (1.0 + 1e-12));
            for (a, b) in old.iter().zip(&bank.xi) {
                let dxi = b - a;
                assert!(dxi * (p - p_prev) >= dxi * dxi * (1.0 - 1e-12));
            }
            assert!(bank.band_excess(&grid) <= 1e-12);
            p_prev = p;
        }
    }
}

proptest! {
    #[test]
    fn play_band_and_energy(xs in prop::collection::vec(-10.0f64..10.0, 2..40), r in 0.0f64..3.0) {
        let mut xi = play_init(xs[0], r).unwrap();
        prop_assert!(xi.abs() <= xs[0].abs());
        for p in &xs[1..] {
            let next = play_step(xi, *p, r).unwrap();
            prop_assert!((p - next).abs() <= r + 1e-12);
            let lhs = (next - xi) * (p - next);
            prop_assert!((lhs - play_dissipation(xi, next, r)).abs() <= 1e-12 * (1.0 + lhs.abs()));
            xi = next;
        }
    }

    #[test]
    fn idle_input_is_a_fixed_point(p in -5.0f64..5.0, q in -5.0f64..5.0) {
        let dens = PreisachDensity::default_box();
        let grid = RGrid::for_density(&dens, 32).unwrap();
        let mut bank = PlayBank::init(p, &grid);
        preisach_step(&mut bank, q, &dens, &grid).unwrap();
        let before = bank.clone();
        let inc = preisach_step(&mut bank, q, &dens, &grid).unwrap();
        prop_assert_eq!(bank, before);
        prop_assert_eq!(inc.d_g0, 0.0);
        prop_assert_eq!(inc.d_u0, 0.0);
        prop_assert_eq!(inc.d_d0_abs, 0.0);
    }

    #[test]
    fn preisach_rate_independence(a in -3.0f64..3.0, b in -3.0f64..3.0, n in 1usize..20) {
        // a monotone ramp split into n steps ends in the same state as one step
        let dens = PreisachDensity::default_box();
        let grid = RGrid::for_density(&dens, 32).unwrap();
        let mut one = PlayBank::init(a, &grid);
        let mut many = one.clone();
        preisach_step(&mut one, b, &dens, &grid).unwrap();
        for k in 1..=n {
            preisach_step(&mut many, a + (b - a) * k as f64 / n as f64, &dens, &grid).unwrap();
        }
        for (x, y) in one.xi.iter().zip(&many.xi) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}
