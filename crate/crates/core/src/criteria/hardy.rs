//! Lower bounds for `L(a) = ∫_D |B^ω_a| ω dA`.
//!
//! Hardy's inequality `Σ |f̂(n)|/(n+1) ≤ π M_1(f, 1)` applied on each circle
//! gives `L(a) ≥ (2/π) Σ_n c_n a^n ω_{n+1}/(n+1)`, which is computed here next
//! to the closed-form reference bound `(π/a) ln(1/(1-a))`.

use serde::Serialize;

use super::norms::NormScanner;
use super::ScanOptions;
use crate::error::{Error, Result};
use crate::kernel::MeanKind;
use crate::numeric::ln_add;
use crate::weights::WeightSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyRow {
    pub a: f64,
    /// `L(a)`.
    pub integral: f64,
    /// `(π/a) ln(1/(1-a))`.
    pub reference_bound: f64,
    pub reference_ratio: f64,
    /// `(2/π) Σ c_n a^n ω_{n+1}/(n+1)`.
    pub series_bound: f64,
    pub series_ratio: f64,
}

pub fn hardy_lower_bound_check(omega: &WeightSpec, a_grid: &[f64], opts: &ScanOptions) -> Result<Vec<HardyRow>> {
    let a_max = a_grid.iter().cloned().fold(0.0, f64::max);
    if a_grid.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(Error::Parameter("Hardy check needs a ∈ (0, 1)".into()));
    }
    let depth = (-(1.0 - a_max).log2()).ceil().max(1.0) as u32;
    let scanner = NormScanner::new(omega, &ScanOptions { norm_depth: depth, ..opts.clone() })?;
    a_grid
        .iter()
        .map(|&a| {
            let integral = scanner.ln_radial_integral(None, a, MeanKind::Kernel)?.exp();
            let reference_bound = std::f64::consts::PI / a * -(-a).ln_1p();
            let series_bound = ln_series_bound(&scanner, a)?.exp();
            Ok(HardyRow {
                a,
                integral,
                reference_bound,
                reference_ratio: integral / reference_bound,
                series_bound,
                series_ratio: integral / series_bound,
            })
        })
        .collect()
}

const MAX_TERMS: usize = 50_000_000;

fn ln_series_bound(scanner: &NormScanner, a: f64) -> Result<f64> {
    let k = scanner.kernel();
    let table = k.moment_table();
    let ln_a = a.ln();
    let mut acc = f64::NEG_INFINITY;
    let mut prev = f64::NEG_INFINITY;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let c = if n < k.options().max_terms { k.ln_c(n)? } else { k.ln_coeff(nf)? };
        let term = c + nf * ln_a + table.ln_moment(nf + 1.0)? - (nf + 1.0).ln();
        acc = ln_add(acc, term);
        // terms are log-concave in n, so once decreasing and negligible the rest is too
        if term < prev && term < acc - 40.0 {
            return Ok(acc + (2.0 / std::f64::consts::PI).ln());
        }
        prev = term;
    }
    Err(Error::NonConvergence { terms: MAX_TERMS, modulus: a })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unweighted_series_bound_is_closed_form() {
        // c_n ω_{n+1}/(n+1) = 1/(n+2), so the bound is (2/π)(-ln(1-a) - a)/a²
        let rows = hardy_lower_bound_check(&WeightSpec::standard(0.0), &[0.5, 0.9], &ScanOptions::default()).unwrap();
        for r in rows {
            let a = r.a;
            let expect = 2.0 / std::f64::consts::PI * (-(-a).ln_1p() - a) / (a * a);
            assert!((r.series_bound - expect).abs() < 1e-10 * expect);
            let l = -(1.0 - a * a).ln() / (a * a);
            assert!((r.integral - l).abs() < 1e-6 * l);
            assert!(r.series_ratio >= 1.0);
        }
    }
}
