use approx::assert_relative_eq;
use bergman::error::Error;
use bergman::weights::{eval_weight, make_nu_omega, make_omega_nu, mixed_tail, moment, tail, Radius, WeightSpec};
use proptest::prelude::*;

// Oracles: closed forms and brute-force Simpson sums on [0, 1 - 1e-9].

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn pointwise_values() {
    assert_eq!(eval_weight(&WeightSpec::standard(0.0), 0.3).unwrap(), 1.0);
    assert_relative_eq!(
        eval_weight(&WeightSpec::exponential(1.0, 1.0, 1.0), 0.5).unwrap(),
        (-2.0f64).exp(),
        max_relative = 1e-14
    );
    assert_relative_eq!(eval_weight(&WeightSpec::log_perturbed(-1.0, -2.0), 0.0).unwrap(), 1.0);
    assert!(matches!(eval_weight(&WeightSpec::standard(0.0), 1.0), Err(Error::Domain(_))));
}

#[test]
fn closed_tails_and_moments() {
    assert_relative_eq!(tail(&WeightSpec::standard(0.0), 0.5).unwrap(), 0.5, max_relative = 1e-14);
    assert_relative_eq!(tail(&WeightSpec::standard(1.0), 0.5).unwrap(), 0.125, max_relative = 1e-14);
    let r = 1.0 - 2f64.powi(-3);
    let want = 1.0 / (1.0 + 3.0 * 2f64.ln());
    assert_relative_eq!(tail(&WeightSpec::log_perturbed(-1.0, -2.0), r).unwrap(), want, max_relative = 1e-12);
    assert_relative_eq!(moment(&WeightSpec::standard(0.0), 3.0).unwrap(), 0.25, max_relative = 1e-14);
    assert_relative_eq!(moment(&WeightSpec::standard(1.0), 1.0).unwrap(), 1.0 / 6.0, max_relative = 1e-14);
}

#[test]
fn quadrature_tail_matches_simpson() {
    let w = WeightSpec::exponential(1.0, 1.0, 1.0);
    for r in [0.0, 0.3, 0.6] {
        let brute = simpson(|s| (-1.0 / (1.0 - s)).exp(), r, 1.0 - 1e-9, 200_000);
        assert_relative_eq!(tail(&w, r).unwrap(), brute, max_relative = 1e-9);
    }
    let brute = simpson(|s| s.powi(5) * (-1.0 / (1.0 - s)).exp(), 0.0, 1.0 - 1e-9, 200_000);
    assert_relative_eq!(moment(&w, 5.0).unwrap(), brute, max_relative = 1e-9);
}

#[test]
fn constructed_weights() {
    let nu = WeightSpec::standard(0.0);
    let on = make_omega_nu(&nu);
    assert_relative_eq!(eval_weight(&on, 0.25).unwrap(), 0.75, max_relative = 1e-14);
    assert_relative_eq!(tail(&on, 0.5).unwrap(), 0.125, max_relative = 1e-14);
    assert_relative_eq!(mixed_tail(&on, &nu, 0.5).unwrap(), 0.5, max_relative = 1e-12);

    let lp = WeightSpec::log_perturbed(-1.0, -2.0);
    let r: f64 = 0.9;
    let l = (1.0f64 - (1.0 - r).ln()).powi(2);
    assert_relative_eq!(tail(&make_omega_nu(&lp), r).unwrap(), 1.0 / (2.0 * l), max_relative = 1e-12);

    let no = make_nu_omega(&WeightSpec::standard(1.0));
    assert_relative_eq!(tail(&no, 0.4).unwrap(), 0.6 / 2f64.sqrt(), max_relative = 1e-13);
}

#[test]
fn mixed_tail_identity_and_divergence() {
    let (omega, nu) = (WeightSpec::standard(1.0), WeightSpec::standard(0.0));
    assert_relative_eq!(mixed_tail(&omega, &nu, 0.5).unwrap(), 0.5, max_relative = 1e-10);
    let d = mixed_tail(&WeightSpec::standard(0.0), &WeightSpec::standard(0.0), 0.9);
    assert!(matches!(d, Err(Error::Divergent(_))), "{d:?}");
}

#[test]
fn deep_radii_keep_precision() {
    // ω̂(1 - 2^{-40}) for (1-r)^1 is 2^{-81}
    let p = Radius::dyadic(40.0);
    let l = WeightSpec::standard(1.0).ln_tail(p).unwrap();
    assert_relative_eq!(l, -81.0 * 2f64.ln(), max_relative = 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tails_decrease(a in -0.9..3.0f64, r in 0.0..0.98f64, dr in 0.001..0.02f64) {
        let w = WeightSpec::standard(a);
        prop_assert!(tail(&w, r + dr).unwrap() < tail(&w, r).unwrap());
    }

    #[test]
    fn moments_decrease_and_bound_below(alpha in 0.2..2.0f64, x in 1.0..200.0f64) {
        let w = WeightSpec::exponential(alpha, 1.0, 1.0);
        let (m, m2) = (moment(&w, x).unwrap(), moment(&w, x + 1.0).unwrap());
        prop_assert!(m2 < m);
        // restricting to [1 - 1/x, 1]
        let lower = tail(&w, 1.0 - 1.0 / x).unwrap() * (1.0 - 1.0 / x).powf(x);
        prop_assert!(m >= lower * (1.0 - 1e-9));
    }

    #[test]
    fn mixed_tail_dominates_ratio(b in 0.6..3.0f64, a in 0.0..0.5f64, r in 0.0..0.99f64) {
        let (omega, nu) = (WeightSpec::standard(b), WeightSpec::standard(a));
        let m = mixed_tail(&omega, &nu, r).unwrap();
        prop_assert!(m >= tail(&omega, r).unwrap() / tail(&nu, r).unwrap() * (1.0 - 1e-10));
    }

    #[test]
    fn scaling_is_linear(c in 0.01..100.0f64, r in 0.0..0.99f64) {
        let w = WeightSpec::log_perturbed(-1.0, -2.0);
        let ratio = tail(&w.clone().scaled(c), r).unwrap() / tail(&w, r).unwrap();
        prop_assert!((ratio / c - 1.0).abs() < 1e-12);
    }
}
