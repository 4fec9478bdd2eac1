//! Criteria built from single-layer integrals of the weights.

use super::{ln_or_infinite, CriterionId, CriterionReport, GridKind, ScanOptions, SecondRole};
use crate::error::Result;
use crate::par;
use crate::scan::Verdict;
use crate::weights::{ln_mixed_tail, mixed_tail_profile, omega_over_nu_hat, Radius, WeightSpec};

/// `t(x) = ν_x (ω/ν̂)_x / ω_{2x}` on `x = 2^k`.
pub fn moment_criterion_scan(omega: &WeightSpec, nu: &WeightSpec, opts: &ScanOptions) -> Result<CriterionReport> {
    omega.validate()?;
    nu.validate()?;
    let q = omega_over_nu_hat(omega, nu);
    let levels: Vec<u32> = (0..=opts.x_levels).collect();
    let ln_trace = par::map(opts.exec, &levels, |&k| -> Result<f64> {
        let x = 2f64.powi(k as i32);
        let mixed = ln_or_infinite(q.ln_moment(x))?;
        if mixed.is_infinite() {
            return Ok(mixed);
        }
        Ok(nu.ln_moment(x)? + mixed - omega.ln_moment(2.0 * x)?)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut rep = CriterionReport::from_ln(
        CriterionId::Moment,
        omega,
        nu,
        SecondRole::Nu,
        GridKind::DyadicExponent,
        levels,
        &ln_trace,
        &opts.rules,
    );
    if ln_trace.iter().any(|v| v.is_infinite()) {
        rep.notes.push("mixed moment (ω/ν̂)_x diverges".into());
    }
    Ok(rep)
}

/// `t(r) = ν̂(r)/ω̂(r) · ∫_r^1 ω/ν̂` on `r = 1 - 2^{-k}`.
///
/// When the mixed tail diverges the verdict is divergent and the growth fit is
/// taken from the windowed trace with the integral cut at `1 - (1-r)^2`.
pub fn tail_criterion_scan(omega: &WeightSpec, nu: &WeightSpec, opts: &ScanOptions) -> Result<CriterionReport> {
    omega.validate()?;
    nu.validate()?;
    let levels: Vec<u32> = (0..=opts.radius_depth).collect();
    let rows = par::map(opts.exec, &levels, |&k| -> Result<(f64, f64)> {
        let p = Radius::dyadic(k as f64);
        let ratio = nu.ln_tail(p)? - omega.ln_tail(p)?;
        let mixed = ln_or_infinite(ln_mixed_tail(omega, nu, p))?;
        let windowed = if mixed.is_infinite() {
            let w = mixed_tail_profile(omega, nu, p, &[(2 * k).max(1)])?[0];
            ratio + w.ln()
        } else {
            ratio + mixed
        };
        Ok((ratio + mixed, windowed))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let ln_trace: Vec<f64> = rows.iter().map(|r| r.0).collect();
    if ln_trace.iter().all(|v| v.is_finite()) {
        return Ok(CriterionReport::from_ln(
            CriterionId::Tail,
            omega,
            nu,
            SecondRole::Nu,
            GridKind::DyadicRadius,
            levels,
            &ln_trace,
            &opts.rules,
        ));
    }
    let windowed: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mut rep = CriterionReport::from_ln(
        CriterionId::Tail,
        omega,
        nu,
        SecondRole::Nu,
        GridKind::DyadicRadius,
        levels,
        &windowed,
        &opts.rules,
    );
    rep.verdict = Verdict::Divergent;
    rep.notes.push(
        "∫_r^1 ω/ν̂ diverges; trace, running sup and fit use the window [r, 1-(1-r)^2]".into(),
    );
    Ok(rep)
}

/// `t(x) = (ω/ν̂)_x · ν̂(1 - 1/x) / ω_{2x}` on `x = 2^k`.
pub fn necessary_moment_condition(omega: &WeightSpec, nu: &WeightSpec, opts: &ScanOptions) -> Result<CriterionReport> {
    omega.validate()?;
    nu.validate()?;
    let q = omega_over_nu_hat(omega, nu);
    let levels: Vec<u32> = (0..=opts.x_levels).collect();
    let ln_trace = par::map(opts.exec, &levels, |&k| -> Result<f64> {
        let x = 2f64.powi(k as i32);
        let mixed = ln_or_infinite(q.ln_moment(x))?;
        if mixed.is_infinite() {
            return Ok(mixed);
        }
        Ok(mixed + nu.ln_tail(Radius::dyadic(k as f64))? - omega.ln_moment(2.0 * x)?)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(CriterionReport::from_ln(
        CriterionId::NecessaryMoment,
        omega,
        nu,
        SecondRole::Nu,
        GridKind::DyadicExponent,
        levels,
        &ln_trace,
        &opts.rules,
    ))
}
