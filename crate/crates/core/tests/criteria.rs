use bergman::classify::{
    classify, moment_tail_equiv_check, product_tail_equiv_check, ClassifyOptions, Membership,
};
use bergman::criteria::{
    hinf_norm_scan, moment_criterion_scan, necessary_moment_condition, tail_criterion_scan, ScanOptions,
};
use bergman::scan::Verdict;
use bergman::weights::{make_omega_nu, WeightSpec};
use proptest::prelude::*;

fn opts() -> ScanOptions {
    ScanOptions::default()
}

fn last(v: &[f64]) -> f64 {
    *v.last().unwrap()
}

#[test]
fn standard_pair_limits() {
    let (omega, nu) = (WeightSpec::standard(1.0), WeightSpec::standard(0.0));
    let tail = tail_criterion_scan(&omega, &nu, &opts()).unwrap();
    assert_eq!(tail.verdict, Verdict::Bounded);
    assert!(tail.trace.iter().all(|t| (t - 2.0).abs() < 1e-9));
    let mom = moment_criterion_scan(&omega, &nu, &opts()).unwrap();
    assert_eq!(mom.verdict, Verdict::Bounded);
    assert!((last(&mom.trace) - 4.0).abs() < 1e-4);
    let nec = necessary_moment_condition(&omega, &nu, &opts()).unwrap();
    assert!(nec.trace.iter().all(|t| t.is_finite()));
}

#[test]
fn diagonal_pair_diverges_logarithmically() {
    let w = WeightSpec::standard(0.0);
    let tail = tail_criterion_scan(&w, &w, &opts()).unwrap();
    assert_eq!(tail.verdict, Verdict::Divergent);
    assert_eq!(moment_criterion_scan(&w, &w, &opts()).unwrap().verdict, Verdict::Divergent);
}

#[test]
fn omega_nu_tail_criterion_is_two() {
    let nu = WeightSpec::log_perturbed(-1.0, -2.0);
    let r = tail_criterion_scan(&make_omega_nu(&nu), &nu, &opts()).unwrap();
    assert!(r.trace.iter().all(|t| (t - 2.0).abs() < 1e-9), "{:?}", r.trace);
}

#[test]
fn hinf_scan_at_origin_is_a_single_quadrature() {
    // ω = (1-r), v = ν̂ = 1-r: t(0) = (1/(2ω_1)) ∫ ω/v dA = 3
    let omega = WeightSpec::standard(1.0);
    let v = WeightSpec::tail_of(WeightSpec::standard(0.0), 1.0);
    let r = hinf_norm_scan(&omega, &v, &opts()).unwrap();
    assert_eq!(r.points[0], 0.0);
    assert!((r.trace[0] - 3.0).abs() < 1e-8, "{}", r.trace[0]);
    assert_eq!(r.verdict, Verdict::Bounded);
}

#[test]
fn classification_fragments() {
    let o = ClassifyOptions::default();
    let s0 = classify(&WeightSpec::standard(0.0), &o).unwrap();
    assert!(s0.dhat.rows.iter().all(|r| (r.ratio - 2.0).abs() < 1e-12));
    let lp = classify(&WeightSpec::log_perturbed(-1.0, -2.0), &o).unwrap();
    assert_eq!((lp.dhat.verdict, lp.dcheck.verdict), (Membership::Member, Membership::NonMember));
    let eq = moment_tail_equiv_check(&WeightSpec::standard(0.0), 10).unwrap();
    for (x, ratio) in eq {
        assert!((ratio - x / (x + 1.0)).abs() < 1e-12);
    }
    let tr = product_tail_equiv_check(&WeightSpec::standard(1.0), &WeightSpec::standard(0.0), &[1, 4, 10]).unwrap();
    assert!(tr.iter().all(|t| (t - 2.0 / 3.0).abs() < 1e-10), "{tr:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tail_trace_is_at_least_one(b in 0.0..3.0f64, a in 0.0..2.0f64) {
        let r = tail_criterion_scan(&WeightSpec::standard(b), &WeightSpec::standard(a), &opts()).unwrap();
        prop_assert!(r.trace.iter().all(|t| *t >= 1.0 - 1e-9));
    }

    #[test]
    fn scaling_leaves_verdicts(c in 0.01..100.0f64, b in 0.0..2.0f64) {
        let nu = WeightSpec::standard(0.0);
        let base = tail_criterion_scan(&WeightSpec::standard(b), &nu, &opts()).unwrap();
        let scaled = tail_criterion_scan(&WeightSpec::standard(b).scaled(c), &nu, &opts()).unwrap();
        prop_assert_eq!(base.verdict, scaled.verdict);
        for (x, y) in base.trace.iter().zip(&scaled.trace) {
            prop_assert!((x - y).abs() <= 1e-9 * x);
        }
    }
}
