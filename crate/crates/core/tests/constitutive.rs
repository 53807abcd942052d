use freezethaw::constitutive::{
    kirchhoff, kirchhoff_inverse, kirchhoff_slope, q_r, validate_hypotheses, ConductivityLaw,
    CutoffPack, DataSamples, FnLaw, MaterialLaws, MobilityLaw, SaturationLaw,
};
use freezethaw::plasticity::Isotropic4;
use proptest::prelude::*;

fn trapezoid(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|k| f(a + k as f64 * h)).sum();
    h * (0.5 * (f(a) + f(b)) + inner)
}

fn good_data() -> DataSamples {
    DataSamples {
        gravity: vec![0.0, -1.0],
        alpha_min: 1.0,
        alpha_total: 2.0,
        omega_min: 100.0,
        omega_total: 200.0,
        p_star_max_abs: 0.5,
        theta_star_min: 263.15,
        p0_max_abs: 0.0,
        theta0_min: 273.15,
        chi0_min: 1.0,
        chi0_max: 1.0,
    }
}

#[test]
fn q_r_examples() {
    assert_eq!(q_r(7.0, 5.0), 5.0);
    assert_eq!(q_r(-7.0, 5.0), -5.0);
    assert_eq!(q_r(3.0, 5.0), 3.0);
}

#[test]
fn kirchhoff_examples() {
    let mu = MobilityLaw::constant(2.0);
    assert_eq!(kirchhoff(1.5, &mu, None), 3.0);
    assert_eq!(kirchhoff_inverse(3.0, &mu, None).unwrap(), 1.5);
    assert_eq!(kirchhoff_slope(-4.0, &mu, Some(2.0)), 2.0);

    // Conductivity below zero is continued by kappa_flat.
    let kap = ConductivityLaw::default();
    assert!((kirchhoff(-2.0, &kap, None) + 2.0 * kap.kappa_flat).abs() < 1e-16);
}

#[test]
fn conductivity_transform_matches_quadrature() {
    let kap = ConductivityLaw::default();
    let q = trapezoid(0.0, 2.0, 200_000, |z| kap.value(z));
    assert!((kirchhoff(2.0, &kap, None) - q).abs() < 1e-10);

    // The quadrature path of a closure law agrees with the same oracle.
    let law = FnLaw { f: |z: f64| kap.value(z), lower: kap.kappa_flat };
    assert!((kirchhoff(2.0, &law, None) - q).abs() < 1e-10);

    // Above the cut the slope freezes at kappa(R).
    let r = 1.5;
    let cut = kirchhoff(2.0, &kap, Some(r));
    let oracle = trapezoid(0.0, r, 200_000, |z| kap.value(z)) + kap.value(r) * (2.0 - r);
    assert!((cut - oracle).abs() < 1e-10);
}

#[test]
fn kirchhoff_inverse_round_trips() {
    let kap = ConductivityLaw::default();
    let mu = MobilityLaw { mu_flat: 0.7, modulation: 2.0 };
    for k in 0..1000 {
        let x = -50.0 + 100.0 * k as f64 / 999.0;
        for r in [None, Some(10.0)] {
            let v = kirchhoff(x, &kap, r);
            let back = kirchhoff_inverse(v, &kap, r).unwrap();
            assert!((back - x).abs() <= 1e-10 * (1.0 + x.abs()), "x = {x}, r = {r:?}: {back}");
            let v = kirchhoff(x, &mu, r);
            let back = kirchhoff_inverse(v, &mu, r).unwrap();
            assert!((back - x).abs() <= 1e-10 * (1.0 + x.abs()));
        }
    }
}

#[test]
fn cutoff_is_invisible_inside_the_level() {
    let laws = MaterialLaws {
        mobility: MobilityLaw { mu_flat: 1.0, modulation: 0.5 },
        ..MaterialLaws::default()
    };
    let cut = CutoffPack::new(&laws, 40.0).unwrap();
    let free = CutoffPack::uncut(&laws);
    for k in 0..=400 {
        let z = -40.0 + 0.2 * k as f64;
        assert_eq!(cut.f(z).to_bits(), free.f(z).to_bits());
        assert_eq!(cut.phi(z).to_bits(), free.phi(z).to_bits());
        assert_eq!(cut.mu(z).to_bits(), free.mu(z).to_bits());
        assert_eq!(cut.m(z).to_bits(), free.m(z).to_bits());
        let theta = z.abs();
        assert_eq!(cut.kappa(theta).to_bits(), free.kappa(theta).to_bits());
        assert_eq!(cut.k(theta).to_bits(), free.k(theta).to_bits());
        assert_eq!(cut.gamma(z, theta, 0.3).to_bits(), free.gamma(z, theta, 0.3).to_bits());
    }
    assert!(CutoffPack::new(&laws, 1.0).is_err());
}

#[test]
fn cut_maps_continue_linearly() {
    let laws = MaterialLaws::default();
    let c = CutoffPack::new(&laws, 3.0).unwrap();
    let f = &laws.saturation;
    assert!((c.f(5.0) - (f.value(3.0) + 2.0 * f.derivative(3.0))).abs() < 1e-15);
    assert_eq!(c.df(5.0), f.derivative(3.0));
    // gamma_R sees the pressure excess above R^2.
    let g = c.gamma(4.0, 1.0, 0.0);
    assert!((g - laws.relaxation.value(1.0 + 7.0, 0.0)).abs() < 1e-18);
    // Temperatures above R are frozen at R in the relaxation argument.
    assert_eq!(c.gamma(0.0, 10.0, 0.0), laws.relaxation.value(3.0, 0.0));
}

#[test]
fn default_laws_pass_with_data() {
    let rep = validate_hypotheses(&MaterialLaws::default(), Some(&good_data()));
    assert!(rep.all_passed(), "{rep}");
    assert_eq!(rep.clauses.len(), 14);
}

fn failing(laws: &MaterialLaws, data: Option<&DataSamples>) -> Vec<String> {
    validate_hypotheses(laws, data).failed().map(|c| c.clause.clone()).collect()
}

#[test]
fn each_violation_names_its_clause() {
    let mut laws = MaterialLaws::default();
    laws.saturation = SaturationLaw::Envelope { c0: 0.5, f_flat: 0.15, f_sharp: 0.2, nu: 0.9 };
    assert_eq!(failing(&laws, None), ["(vi)"]);

    let mut laws = MaterialLaws::default();
    laws.heat_capacity.b = 1.2;
    let fails = failing(&laws, None);
    assert!(fails.contains(&"(viii)".to_string()), "{fails:?}");

    let mut laws = MaterialLaws::default();
    let (c_plus, _) = laws.density.saturation_constants();
    laws.density = laws.density.scaled(0.6 / c_plus).unwrap();
    let fails = failing(&laws, None);
    assert!(fails.contains(&"saturation-constants".to_string()), "{fails:?}");

    let mut laws = MaterialLaws::default();
    laws.conductivity.a = 0.9;
    assert_eq!(failing(&laws, None), ["(ix)"]);

    let mut laws = MaterialLaws::default();
    laws.relaxation.gamma_sharp = 0.5 * laws.relaxation.gamma_flat;
    assert_eq!(failing(&laws, None), ["(x)"]);

    let mut laws = MaterialLaws::default();
    laws.tensors.ah = Isotropic4::new(0.0, 1.0).unwrap();
    assert_eq!(failing(&laws, None), ["(i)"]);

    let mut laws = MaterialLaws::default();
    laws.constants.rho_star = 1.5;
    assert_eq!(failing(&laws, None), ["constants"]);

    let laws = MaterialLaws::default();
    let mut d = good_data();
    d.alpha_min = -0.1;
    assert_eq!(failing(&laws, Some(&d)), ["(iii)"]);
    let mut d = good_data();
    d.theta_star_min = 0.5;
    assert_eq!(failing(&laws, Some(&d)), ["(iv)"]);
    let mut d = good_data();
    d.chi0_max = 1.2;
    assert_eq!(failing(&laws, Some(&d)), ["(v)"]);
    let mut d = good_data();
    d.gravity = vec![f64::NAN, 0.0];
    assert_eq!(failing(&laws, Some(&d)), ["(ii)"]);
}

proptest! {
    #[test]
    fn phi_and_v_are_consistent(p in -80.0f64..80.0, r in 1.5f64..30.0) {
        let laws = MaterialLaws::default();
        let c = CutoffPack::new(&laws, r).unwrap();
        // Phi_R' = f_R, checked by central differences.
        let h = 1e-5;
        let fd = (c.phi(p + h) - c.phi(p - h)) / (2.0 * h);
        prop_assert!((fd - c.f(p)).abs() < 1e-7);
        // V_R = int_0^p z f_R'(z) dz is nonnegative, and f_R is nondecreasing.
        prop_assert!(c.v(p) >= -1e-14);
        prop_assert!(c.f(p + 0.1) >= c.f(p));
    }

    #[test]
    fn transforms_are_monotone(x in -100.0f64..100.0, dx in 1e-3f64..10.0, r in 1.5f64..30.0) {
        let laws = MaterialLaws::default();
        let c = CutoffPack::new(&laws, r).unwrap();
        prop_assert!(c.m(x + dx) > c.m(x));
        prop_assert!(c.k(x + dx) > c.k(x));
        let back = c.k_inverse(c.k(x)).unwrap();
        prop_assert!((back - x).abs() <= 1e-10 * (1.0 + x.abs()));
    }
}
