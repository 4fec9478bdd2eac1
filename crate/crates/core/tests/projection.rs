use bergman::projection::{
    project, szego_check_with, szego_points, HarmonicPolynomial, PolarFunctionSample, PolarMesh,
    ProjectionInput, Projector, SzegoMethod,
};
use bergman::par::Execution;
use bergman::weights::WeightSpec;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn analytic_inputs_are_fixed() {
    let omega = WeightSpec::exponential(1.0, 1.0, 1.0);
    let f = HarmonicPolynomial::new([(0, c(1.0, 0.5)), (3, c(-2.0, 0.0))]);
    for z in szego_points() {
        let p = project(&omega, &ProjectionInput::Harmonic(&f), z, 1e-12).unwrap();
        assert!((p - f.eval(z)).norm() < 1e-10, "{z}: {p}");
    }
}

#[test]
fn mode_gains_are_one() {
    for w in [WeightSpec::standard(0.0), WeightSpec::standard(3.0), WeightSpec::exponential(1.0, 1.0, 1.0)] {
        let p = Projector::new(&w, 1e-12).unwrap();
        for m in [0u32, 1, 5, 20] {
            let g = p.mode_gain(m).unwrap();
            assert!((g - 1.0).abs() < 1e-10, "{w:?} m={m}: {g}");
        }
    }
}

#[test]
fn sampled_and_harmonic_paths_agree() {
    // the sampled path stops at u_max, so the weight needs a light rim
    let omega = WeightSpec::exponential(1.0, 1.0, 1.0);
    let mesh = PolarMesh::default();
    let check = szego_check_with(
        &omega,
        4,
        1e-12,
        SzegoMethod::Sampled { mesh },
        &szego_points(),
        Execution::Sequential,
    )
    .unwrap();
    assert!(check.max_deviation < 1e-8, "{}", check.max_deviation);
}

#[test]
fn domain_is_enforced() {
    let omega = WeightSpec::standard(0.0);
    let f = HarmonicPolynomial::monomial(1);
    assert!(project(&omega, &ProjectionInput::Harmonic(&f), c(1.0, 0.0), 1e-12).is_err());
}

#[test]
fn sample_of_harmonic_polynomial_matches() {
    let omega = WeightSpec::standard(1.0);
    let f = HarmonicPolynomial::new([(-2, c(0.0, 1.0)), (1, c(1.0, 0.0)), (2, c(0.5, 0.0))]);
    let mesh = PolarMesh::default();
    let s = PolarFunctionSample::from_fn(&mesh, |z| f.eval(z)).unwrap();
    let p = Projector::new(&omega, 1e-12).unwrap();
    let (h, q) = (p.harmonic(&f).unwrap(), p.sample(&s).unwrap());
    for z in szego_points() {
        assert!((h.eval(z) - q.eval(z)).norm() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projection_is_idempotent(re in -2.0..2.0f64, im in -2.0..2.0f64, m in -5i32..=5, x in -0.9..0.9f64) {
        let p = Projector::new(&WeightSpec::standard(2.0), 1e-12).unwrap();
        let f = HarmonicPolynomial::monomial(m).scale(c(re, im));
        let once = p.harmonic(&f).unwrap();
        let twice = p.harmonic(&once).unwrap();
        let z = c(x, 0.0);
        prop_assert!((once.eval(z) - twice.eval(z)).norm() < 1e-10 * (1.0 + once.eval(z).norm()));
    }
}
