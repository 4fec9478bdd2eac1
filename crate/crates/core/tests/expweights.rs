use approx::assert_relative_eq;
use bergman::criteria::ScanOptions;
use bergman::expweights::{
    d_rho, hinf_split_scan, straight_segment_bound, wzero_check, ClassESpec, Rho,
};
use bergman::weights::{eval_weight, Radius, WeightSpec};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn phase_laplacian_closed_form() {
    // φ = 1/(1-r): φ' = (1-r)^-2, φ'' = 2(1-r)^-3, so Δφ(1/2) = 16 + 8
    let spec = ClassESpec::power(1.0, 1.0, 1.0);
    let p = Radius::new(0.5).unwrap();
    assert_relative_eq!(spec.phi(p), 2.0, max_relative = 1e-14);
    assert_relative_eq!(spec.laplacian(p), 24.0, max_relative = 1e-12);
    assert_eq!(spec.rho().exponent, 1.5);
    assert_eq!(spec.laplacian(Radius::new(0.0).unwrap()), f64::INFINITY);
}

#[test]
fn weights_square() {
    let spec = ClassESpec::log_perturbed(1.0, 1.0, 0.5);
    for r in [0.0, 0.4, 0.9] {
        let w = eval_weight(&spec.w(), r).unwrap();
        assert_relative_eq!(eval_weight(&spec.omega(), r).unwrap(), w * w, max_relative = 1e-13);
    }
}

#[test]
fn wzero_band_for_power_phase() {
    let rep = wzero_check(&ClassESpec::power(1.0, 1.0, 1.0), 30, 4.0).unwrap();
    assert!(rep.within_band, "band {}", rep.band);
    // Δφ ~ 2(1-r)^-3 deep inside, so the ratio tends to 2^{-1/2}
    let deep = rep.rows.last().unwrap();
    assert!((deep.ratio - 0.5f64.sqrt()).abs() < 1e-3, "{}", deep.ratio);
}

#[test]
fn validation_rejects_bad_parameters() {
    assert!(ClassESpec::power(0.0, 1.0, 1.0).validate().is_err());
    assert!(ClassESpec::power(1.0, -1.0, 1.0).validate().is_err());
}

#[test]
fn segment_bound_closed_forms() {
    let flat = Rho { exponent: 0.0 };
    let d = straight_segment_bound(flat, c(0.1, 0.2), c(-0.3, 0.5)).unwrap();
    assert_relative_eq!(d, (c(0.1, 0.2) - c(-0.3, 0.5)).norm(), max_relative = 1e-12);
    // ∫_0^{1/2} dr/(1-r) = ln 2
    let d = straight_segment_bound(Rho { exponent: 1.0 }, c(0.0, 0.0), c(0.0, 0.5)).unwrap();
    assert_relative_eq!(d, 2f64.ln(), max_relative = 1e-12);
}

#[test]
fn radial_geodesic_from_origin() {
    let r = d_rho(Rho { exponent: 1.0 }, c(0.0, 0.0), c(0.5, 0.0), 256).unwrap();
    assert!(r.value <= r.chord * (1.0 + 1e-2), "{r:?}");
    assert!((r.value - 2f64.ln()).abs() <= r.tolerance + 1e-2, "{r:?}");
}

#[test]
fn split_adds_up_to_the_trace() {
    let opts = ScanOptions { norm_depth: 8, ..ScanOptions::default() };
    let spec = ClassESpec::power(1.0, 1.0, 1.0);
    let scan = hinf_split_scan(&spec.omega(), &spec.w(), &opts).unwrap();
    for (s, t) in scan.split.iter().zip(&scan.report.trace) {
        assert_relative_eq!(s.inner + s.outer, *t, max_relative = opts.tol);
    }
}

#[test]
fn mismatched_weights_diverge() {
    let opts = ScanOptions { norm_depth: 10, ..ScanOptions::default() };
    let spec = ClassESpec::power(1.0, 1.0, 1.0);
    let v = WeightSpec::standard(0.0);
    let scan = hinf_split_scan(&spec.omega(), &v, &opts).unwrap();
    let t = &scan.report.trace;
    assert!(t.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn segment_bound_is_symmetric_and_dominates_length(
        x in -0.7..0.7f64, y in -0.7..0.7f64, u in -0.7..0.7f64, v in -0.7..0.7f64, e in 0.5..2.0f64,
    ) {
        let rho = Rho { exponent: e };
        let (z, w) = (c(x, y), c(u, v));
        let a = straight_segment_bound(rho, z, w).unwrap();
        let b = straight_segment_bound(rho, w, z).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1e-300));
        prop_assert!(a >= (z - w).norm() * (1.0 - 1e-12));
    }
}
