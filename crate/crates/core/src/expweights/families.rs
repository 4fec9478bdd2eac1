//! H∞ scans for perturbations of `ω = w²`, `v = w`.

use serde::Serialize;

use super::ClassESpec;
use crate::classify::{dhat_classify, ClassifyOptions, Membership};
use crate::criteria::{CriterionReport, NormScanner, ScanOptions};
use crate::error::{Error, Result};
use crate::par;
use crate::weights::{Radius, WeightSpec};

/// The H∞ functional at `a` split at `|ζ| = (1+a)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionSplit {
    pub a: f64,
    /// Contribution of `|ζ| >= (1+a)/2`.
    pub outer: f64,
    /// Contribution of `|ζ| < (1+a)/2`.
    pub inner: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyScan {
    pub omega: WeightSpec,
    pub v: WeightSpec,
    pub report: CriterionReport,
    pub split: Vec<RegionSplit>,
    /// Doubling constant of `ν̂` from the classification, when `ν` enters.
    pub dhat_constant: Option<f64>,
    /// `max_a ν̂(a)/ν̂((1+a)/2)` on the scan grid; the inner region obeys
    /// `ν̂(ζ) >= ν̂(a)/C` whenever this is at most the doubling constant.
    pub inner_ratio_max: Option<f64>,
    pub notes: Vec<String>,
}

/// H∞ scan of `(ω, v)` with the region split at every level.
pub fn hinf_split_scan(omega: &WeightSpec, v: &WeightSpec, opts: &ScanOptions) -> Result<FamilyScan> {
    let scanner = NormScanner::new(omega, opts)?;
    let mut report = scanner.hinf_scan(v)?;
    report.notes.clear();
    let split = par::map(opts.exec, &report.points, |&a| -> Result<RegionSplit> {
        let (inner, outer) = scanner.ln_hinf_split(v, a)?;
        Ok(RegionSplit {
            a,
            outer: outer.exp(),
            inner: inner.exp(),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(FamilyScan {
        omega: omega.clone(),
        v: v.clone(),
        report,
        split,
        dhat_constant: None,
        inner_ratio_max: None,
        notes: Vec::new(),
    })
}

/// `ω = w²` against `v = w ν̂^t ρ^σ`.
pub fn tail_power_family_scan(
    spec: &ClassESpec,
    nu: &WeightSpec,
    t: f64,
    sigma: f64,
    opts: &ScanOptions,
) -> Result<FamilyScan> {
    spec.validate()?;
    if ![-1.0, 0.0, 1.0].contains(&t) {
        return Err(Error::Parameter(format!("t must be -1, 0 or 1, got {t}")));
    }
    let mut v = spec.w();
    if t != 0.0 {
        v = WeightSpec::product(v, WeightSpec::tail_of(nu.clone(), t));
    }
    if sigma != 0.0 {
        v = WeightSpec::product(v, spec.rho_power(sigma));
    }
    let mut scan = hinf_split_scan(&spec.omega(), &v, opts)?;
    if t != 0.0 {
        let copts = ClassifyOptions {
            exec: opts.exec,
            ..Default::default()
        };
        let dhat = dhat_classify(nu, &copts)?;
        match dhat.verdict {
            Membership::Member => {}
            Membership::NonMember => {
                return Err(Error::Parameter(format!("ν = {} is not in D̂", nu.label())));
            }
            Membership::Inconclusive => scan.notes.push("D̂ membership of ν is inconclusive".into()),
        }
        let ratios = scan
            .report
            .points
            .iter()
            .map(|&a| -> Result<f64> {
                let p = Radius::new(a)?;
                Ok((nu.ln_tail(p)? - nu.ln_tail(p.midpoint_to_rim())?).exp())
            })
            .collect::<Result<Vec<_>>>()?;
        let worst = ratios.iter().copied().fold(0.0, f64::max);
        if worst > dhat.constant * (1.0 + 1e-9) {
            scan.notes.push(format!(
                "inner-region ratio {worst} exceeds the doubling constant {}",
                dhat.constant
            ));
        }
        scan.dhat_constant = Some(dhat.constant);
        scan.inner_ratio_max = Some(worst);
    }
    Ok(scan)
}

/// `v = (1-r²)^γ w`, `ω = (1-r²)^{2σ} w²` with `w = exp(-α(1-r²)^{-β})`.
pub fn damped_family_scan(alpha: f64, beta: f64, sigma: f64, gamma: f64, opts: &ScanOptions) -> Result<FamilyScan> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::Parameter(format!("need α, β > 0 (got {alpha}, {beta})")));
    }
    let with_power = |a: f64, w: WeightSpec| {
        if a == 0.0 {
            w
        } else {
            WeightSpec::product(WeightSpec::standard_r2(a), w)
        }
    };
    let v = with_power(gamma, WeightSpec::exponential(alpha, beta, 2.0));
    let omega = with_power(2.0 * sigma, WeightSpec::exponential(2.0 * alpha, beta, 2.0));
    hinf_split_scan(&omega, &v, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::Verdict;

    fn opts(depth: u32) -> ScanOptions {
        ScanOptions {
            norm_depth: depth,
            ..Default::default()
        }
    }

    #[test]
    fn split_adds_up() {
        let s = damped_family_scan(1.0, 1.0, 0.0, 0.0, &opts(6)).unwrap();
        for (row, total) in s.split.iter().zip(&s.report.trace) {
            assert!((row.inner + row.outer - total).abs() < 1e-6 * total, "{row:?} vs {total}");
        }
    }

    #[test]
    fn matched_exponential_pair_is_bounded() {
        let spec = ClassESpec::power(1.0, 1.0, 1.0);
        let s = tail_power_family_scan(&spec, &WeightSpec::standard(0.0), 0.0, 0.0, &opts(12)).unwrap();
        assert_eq!(s.report.verdict, Verdict::Bounded, "{:?}", s.report.trace);
    }

    #[test]
    fn tail_factor_records_doubling_check() {
        let spec = ClassESpec::power(1.0, 1.0, 1.0);
        let s = tail_power_family_scan(&spec, &WeightSpec::standard(1.0), 1.0, 0.0, &opts(8)).unwrap();
        // ν̂ = (1-r)²/2 halves twice per step
        assert!((s.inner_ratio_max.unwrap() - 4.0).abs() < 1e-9);
        assert!(s.dhat_constant.unwrap() >= 4.0 - 1e-9);
    }
}
