//! Radial weights on the unit disk: densities, tails `ω̂(r) = ∫_r^1 ω`,
//! moments `ω_x = ∫_0^1 r^x ω`, and the mixed tails `∫_r^1 ω/ν̂`.
//!
//! Quantities are carried as logarithms. Quadratures run in
//! `u = -ln(1-r)`, where boundary mass becomes a smooth, decaying integrand.

mod mixed;
mod moments;
mod radius;
mod spec;
mod tail;

pub use mixed::{
    ln_mixed_tail, make_nu_omega, make_omega_nu, mixed_tail, mixed_tail_profile, omega_over_nu_hat,
};
pub use moments::{MomentTable, SegmentInfo};
pub use radius::Radius;
pub use spec::{Family, StandardForm, Table, WeightSpec};
pub use tail::{Method, TailEstimate, TAIL_TOL};

use crate::error::Result;

/// `ω(r)`.
pub fn eval_weight(spec: &WeightSpec, r: f64) -> Result<f64> {
    spec.validate()?;
    Ok(spec.ln_density(Radius::new(r)?).exp())
}

/// `ω̂(r)`.
pub fn tail(spec: &WeightSpec, r: f64) -> Result<f64> {
    spec.validate()?;
    spec.tail(r)
}

/// `ω_x`.
pub fn moment(spec: &WeightSpec, x: f64) -> Result<f64> {
    spec.validate()?;
    spec.moment(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eval_oracles() {
        assert_eq!(eval_weight(&WeightSpec::standard(0.0), 0.3).unwrap(), 1.0);
        let e = eval_weight(&WeightSpec::exponential(1.0, 1.0, 1.0), 0.5).unwrap();
        assert!((e - (-2f64).exp()).abs() < 1e-16);
        assert_eq!(eval_weight(&WeightSpec::log_perturbed(-1.0, -2.0), 0.0).unwrap(), 1.0);
        assert!(eval_weight(&WeightSpec::standard(0.0), 1.0).is_err());
    }

    fn families() -> Vec<WeightSpec> {
        vec![
            WeightSpec::standard(0.0),
            WeightSpec::standard_r2(1.0),
            WeightSpec::log_perturbed(-1.0, -2.0),
            WeightSpec::log_perturbed(0.5, 1.0),
            WeightSpec::exponential(1.0, 1.0, 1.0),
            make_omega_nu(&WeightSpec::log_perturbed(-1.0, -2.0)),
            make_nu_omega(&WeightSpec::standard(1.0)),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn tail_decreasing_and_moment_decreasing(i in 0usize..7, n in 0.0f64..30.0, x in 0.0f64..200.0) {
            let s = &families()[i];
            let a = s.ln_tail(Radius::dyadic(n)).unwrap();
            let b = s.ln_tail(Radius::dyadic(n + 0.25)).unwrap();
            prop_assert!(b < a);
            let m0 = s.ln_moment(x).unwrap();
            let m1 = s.ln_moment(x * 1.1 + 0.1).unwrap();
            prop_assert!(m1 < m0);
        }

        #[test]
        fn mixed_tail_dominates_tail_ratio(n in 0.0f64..20.0, b in 0.6f64..2.0) {
            let omega = WeightSpec::standard(b);
            let nu = WeightSpec::log_perturbed(-1.0, -2.0);
            let p = Radius::dyadic(n);
            let m = ln_mixed_tail(&omega, &nu, p).unwrap();
            let lower = omega.ln_tail(p).unwrap() - nu.ln_tail(p).unwrap();
            prop_assert!(m >= lower - 1e-9);
        }

        #[test]
        fn moment_lower_bound_by_tail(i in 0usize..7, x in 1.0f64..1e4) {
            let s = &families()[i];
            let p = Radius::new(1.0 - 1.0 / x).unwrap();
            let bound = s.ln_tail(p).unwrap() + x * (-1.0 / x).ln_1p();
            prop_assert!(s.ln_moment(x).unwrap() >= bound - 1e-9);
        }
    }
}
