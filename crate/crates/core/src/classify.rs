//! Membership of radial weights in the upper doubling class D̂, the lower
//! doubling class Ď and D = D̂ ∩ Ď, decided from finite dyadic traces.
//!
//! Each class is tested by two independent characterizations: dyadic tail
//! ratios plus a moment test for D̂, and dyadic tail ratios plus an integral
//! condition for Ď. Disagreement yields `Inconclusive`. All verdicts are
//! heuristics from finite depth and are labeled as such in the report.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::fit::linear_fit;
use crate::numeric::{integrate_ln, ln_add, LnQuadOptions};
use crate::par::{self, Execution};
use crate::scan::{assess_ln, Assessment, Verdict, VerdictRules};
use crate::weights::{Radius, WeightSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Member,
    NonMember,
    Inconclusive,
}

impl Membership {
    fn from_bounded(v: Verdict) -> Self {
        match v {
            Verdict::Bounded => Membership::Member,
            Verdict::Divergent => Membership::NonMember,
            Verdict::Inconclusive => Membership::Inconclusive,
        }
    }

    /// Agreement of two characterizations.
    pub fn agree(self, other: Self) -> Self {
        if self == other {
            self
        } else {
            Membership::Inconclusive
        }
    }

    pub fn and(self, other: Self) -> Self {
        use Membership::*;
        match (self, other) {
            (Member, Member) => Member,
            (NonMember, _) | (_, NonMember) => NonMember,
            _ => Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyOptions {
    /// Dyadic levels `r_n = 1 - 2^{-n}`, `n = 1..=depth`.
    pub depth: u32,
    pub k_grid: Vec<f64>,
    /// A Ď ratio must exceed `1 + margin`.
    pub margin: f64,
    /// Moment test uses `x = 2^k`, `k = 0..=x_levels`.
    pub x_levels: u32,
    pub gammas: Vec<f64>,
    /// Number of trailing levels on which trends are judged.
    pub window: usize,
    pub rules: VerdictRules,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            depth: 40,
            k_grid: vec![2.0, 4.0, 8.0, 16.0],
            margin: 0.05,
            x_levels: 20,
            gammas: vec![0.5, 1.0, 2.0],
            window: 8,
            rules: VerdictRules::default(),
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DyadicRow {
    pub n: u32,
    pub r: f64,
    pub ln_tail: f64,
    /// `ω̂(r_n) / ω̂(r_{n+1})`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentTest {
    pub x: Vec<f64>,
    /// `ω_x / ω_{2x}`.
    pub ratio: Vec<f64>,
    pub assessment: Assessment,
}

#[derive(Debug, Clone, Serialize)]
pub struct DhatFragment {
    pub verdict: Membership,
    pub dyadic_verdict: Membership,
    pub moment_verdict: Membership,
    /// `sup_n ω̂(r_n)/ω̂(r_{n+1})` over the grid.
    pub constant: f64,
    pub rows: Vec<DyadicRow>,
    pub moment: MomentTest,
    /// Largest local slope of `ln ω̂` against `ln(1-r)` on the last 16 levels.
    pub alpha_est: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KTrace {
    pub k: f64,
    pub levels: Vec<u32>,
    /// `ω̂(r_n) / ω̂(1 - (1-r_n)/K)`.
    pub ratio: Vec<f64>,
    pub inf: f64,
    pub verdict: Membership,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralTrace {
    pub gamma: f64,
    pub levels: Vec<u32>,
    /// `ω̂(r)^γ ∫_0^r ds / (ω̂(s)^γ (1-s))`.
    pub values: Vec<f64>,
    pub assessment: Assessment,
}

#[derive(Debug, Clone, Serialize)]
pub struct DcheckFragment {
    pub verdict: Membership,
    pub dyadic_verdict: Membership,
    pub integral_verdict: Membership,
    pub per_k: Vec<KTrace>,
    /// Smallest member `K` with the infimum ratio `C` over the grid.
    pub pair: Option<(f64, f64)>,
    /// A member verdict at some `K` persists at every larger `K`.
    pub k_monotone: bool,
    pub integral: Vec<IntegralTrace>,
    /// Smallest local slope of `ln ω̂` against `ln(1-r)` on the last 16 levels.
    pub beta_est: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub weight: WeightSpec,
    pub options: ClassifyOptions,
    pub dhat: DhatFragment,
    pub dcheck: DcheckFragment,
    pub d_verdict: Membership,
    /// Least-squares slope of `ln ω̂` against `ln(1-r)` on the last 16 levels.
    pub tail_slope: f64,
    pub note: &'static str,
}

const NOTE: &str = "finite-depth heuristic: verdicts describe the computed traces, not a proof";

/// `ln ω̂(1 - 2^{-n})` for `n = 0..=n_max`.
fn ln_tails(spec: &WeightSpec, n_max: u32, exec: Execution) -> Result<Vec<f64>> {
    par::map_range(exec, n_max as usize + 1, |n| spec.ln_tail(Radius::dyadic(n as f64)))
        .into_iter()
        .collect()
}

pub fn classify(spec: &WeightSpec, opts: &ClassifyOptions) -> Result<ClassificationReport> {
    spec.validate()?;
    if opts.depth < 8 {
        return Err(Error::Parameter(format!("classification depth must be >= 8, got {}", opts.depth)));
    }
    let lt = ln_tails(spec, opts.depth + 1, opts.exec)?;
    let dhat = dhat_from_tails(spec, &lt, opts)?;
    let dcheck = dcheck_from_tails(spec, &lt, opts)?;
    let depth = opts.depth as usize;
    let lo = depth.saturating_sub(16).max(1);
    let xs: Vec<f64> = (lo..=depth).map(|n| -(n as f64) * std::f64::consts::LN_2).collect();
    let tail_slope = linear_fit(&xs, &lt[lo..=depth]).map_or(f64::NAN, |f| f.slope);
    Ok(ClassificationReport {
        weight: spec.clone(),
        options: opts.clone(),
        d_verdict: dhat.verdict.and(dcheck.verdict),
        dhat,
        dcheck,
        tail_slope,
        note: NOTE,
    })
}

pub fn dhat_classify(spec: &WeightSpec, opts: &ClassifyOptions) -> Result<DhatFragment> {
    let lt = ln_tails(spec, opts.depth + 1, opts.exec)?;
    dhat_from_tails(spec, &lt, opts)
}

pub fn dcheck_classify(spec: &WeightSpec, opts: &ClassifyOptions) -> Result<DcheckFragment> {
    let lt = ln_tails(spec, opts.depth + 1, opts.exec)?;
    dcheck_from_tails(spec, &lt, opts)
}

fn local_slopes(lt: &[f64], depth: usize) -> Vec<f64> {
    let lo = depth.saturating_sub(16).max(1);
    (lo..depth)
        .map(|n| (lt[n] - lt[n + 1]) / std::f64::consts::LN_2)
        .collect()
}

fn dhat_from_tails(spec: &WeightSpec, lt: &[f64], opts: &ClassifyOptions) -> Result<DhatFragment> {
    let depth = opts.depth as usize;
    let levels: Vec<f64> = (1..=depth).map(|n| n as f64).collect();
    let ln_ratio: Vec<f64> = (1..=depth).map(|n| lt[n] - lt[n + 1]).collect();
    let rows = (1..=depth)
        .map(|n| DyadicRow {
            n: n as u32,
            r: Radius::dyadic(n as f64).r,
            ln_tail: lt[n],
            ratio: (lt[n] - lt[n + 1]).exp(),
        })
        .collect();
    let w = opts.window.min(depth - 1);
    let last = &ln_ratio[depth - w - 1..];
    let growing = last.windows(2).all(|p| p[1] - p[0] >= 1.05f64.ln());
    let a = assess_ln(&levels, &ln_ratio, &opts.rules);
    let dyadic_verdict = if growing {
        Membership::NonMember
    } else {
        Membership::from_bounded(a.verdict)
    };
    let moment = moment_dhat_test(spec, opts.x_levels, &opts.rules, opts.exec)?;
    let moment_verdict = Membership::from_bounded(moment.assessment.verdict);
    let slopes = local_slopes(lt, depth);
    Ok(DhatFragment {
        verdict: dyadic_verdict.agree(moment_verdict),
        dyadic_verdict,
        moment_verdict,
        constant: ln_ratio.iter().cloned().fold(f64::NEG_INFINITY, f64::max).exp(),
        rows,
        moment,
        alpha_est: slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Trace `ω_x / ω_{2x}` on `x = 2^k`, `k = 0..=x_levels`.
pub fn moment_dhat_test(spec: &WeightSpec, x_levels: u32, rules: &VerdictRules, exec: Execution) -> Result<MomentTest> {
    let ks: Vec<u32> = (0..=x_levels).collect();
    let pairs = par::map(exec, &ks, |&k| {
        let x = 2f64.powi(k as i32);
        Ok::<_, Error>((x, spec.ln_moment(x)? - spec.ln_moment(2.0 * x)?))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let levels: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let ln_ratio: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok(MomentTest {
        x: pairs.iter().map(|p| p.0).collect(),
        ratio: ln_ratio.iter().map(|v| v.exp()).collect(),
        assessment: assess_ln(&levels, &ln_ratio, rules),
    })
}

fn k_verdict(t: &[f64], levels: &[u32], window: usize, margin: f64) -> Membership {
    let w = window.min(t.len());
    let last = &t[t.len() - w..];
    let lv: Vec<f64> = levels[levels.len() - w..].iter().map(|&n| (n as f64).ln()).collect();
    let floor = margin.ln_1p();
    let (mn, mx) = last
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let nondecreasing = last.windows(2).all(|p| p[1] >= p[0] - 1e-9 * (1.0 + p[0].abs()));
    if nondecreasing || (mx - mn) <= 0.02 * mx.abs() {
        return if mn > floor { Membership::Member } else { Membership::NonMember };
    }
    if last[w - 1] <= floor {
        return Membership::NonMember;
    }
    if last.iter().all(|v| *v > 0.0) {
        let ln_t: Vec<f64> = last.iter().map(|v| v.ln()).collect();
        if let Some(f) = linear_fit(&lv, &ln_t) {
            if f.slope < 0.0 && f.r2 > 0.99 {
                return Membership::NonMember;
            }
        }
    }
    Membership::Inconclusive
}

fn dcheck_from_tails(spec: &WeightSpec, lt: &[f64], opts: &ClassifyOptions) -> Result<DcheckFragment> {
    let depth = opts.depth as usize;
    let levels: Vec<u32> = (1..=opts.depth).collect();
    let mut per_k = Vec::new();
    for &k in &opts.k_grid {
        if !(k > 1.0) {
            return Err(Error::Parameter(format!("K must exceed 1, got {k}")));
        }
        let far = par::map(opts.exec, &levels, |&n| {
            spec.ln_tail(Radius::from_ln_delta(-(n as f64) * std::f64::consts::LN_2 - k.ln()))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let t: Vec<f64> = levels.iter().zip(&far).map(|(&n, f)| lt[n as usize] - f).collect();
        let verdict = k_verdict(&t, &levels, opts.window, opts.margin);
        per_k.push(KTrace {
            k,
            levels: levels.clone(),
            inf: t.iter().cloned().fold(f64::INFINITY, f64::min).exp(),
            ratio: t.iter().map(|v| v.exp()).collect(),
            verdict,
        });
    }
    let first_member = per_k.iter().position(|t| t.verdict == Membership::Member);
    let k_monotone = first_member.is_none_or(|i| per_k[i..].iter().all(|t| t.verdict == Membership::Member));
    let dyadic_verdict = if first_member.is_some() {
        Membership::Member
    } else if per_k.iter().all(|t| t.verdict == Membership::NonMember) {
        Membership::NonMember
    } else {
        Membership::Inconclusive
    };
    let integral = opts
        .gammas
        .iter()
        .map(|&g| integral_characterization_trace(spec, g, opts.depth, &opts.rules))
        .collect::<Result<Vec<_>>>()?;
    let integral_verdict = if integral.iter().all(|t| t.assessment.verdict == Verdict::Bounded) {
        Membership::Member
    } else if integral.iter().all(|t| t.assessment.verdict == Verdict::Divergent) {
        Membership::NonMember
    } else {
        Membership::Inconclusive
    };
    let slopes = local_slopes(lt, depth);
    Ok(DcheckFragment {
        verdict: dyadic_verdict.agree(integral_verdict),
        dyadic_verdict,
        integral_verdict,
        pair: first_member.map(|i| (per_k[i].k, per_k[i].inf)),
        k_monotone,
        per_k,
        integral,
        beta_est: slopes.iter().cloned().fold(f64::INFINITY, f64::min),
    })
}

/// `ω̂(r_n)^γ ∫_0^{r_n} ds / (ω̂(s)^γ (1-s))` for `n = 1..=depth`.
pub fn integral_characterization_trace(spec: &WeightSpec, gamma: f64, depth: u32, rules: &VerdictRules) -> Result<IntegralTrace> {
    // ds/(1-s) = du
    let failure = std::cell::RefCell::new(None);
    let f = |u: f64| match spec.ln_tail(Radius::from_u(u)) {
        Ok(t) => -gamma * t,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NEG_INFINITY
        }
    };
    // ln ω̂ carries absolute rounding of order eps·|ln ω̂|, which for fast
    // decaying weights exceeds any fixed relative tolerance
    let opts = LnQuadOptions {
        rel_tol: 1e-7,
        lenient: true,
        ..Default::default()
    };
    let mut acc = f64::NEG_INFINITY;
    let mut values = Vec::with_capacity(depth as usize);
    let ln2 = std::f64::consts::LN_2;
    for n in 1..=depth {
        let piece = integrate_ln(&f, (n - 1) as f64 * ln2, n as f64 * ln2, &opts)?;
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        acc = ln_add(acc, piece.ln_value);
        values.push(gamma * spec.ln_tail(Radius::dyadic(n as f64))? + acc);
    }
    let levels: Vec<u32> = (1..=depth).collect();
    let lv: Vec<f64> = levels.iter().map(|&n| n as f64).collect();
    Ok(IntegralTrace {
        gamma,
        assessment: assess_ln(&lv, &values, rules),
        values: values.iter().map(|v| v.exp()).collect(),
        levels,
    })
}

/// Trace `ω_x / ω̂(1 - 1/x)` on `x = 2^k`, `k = 0..=x_levels`.
pub fn moment_tail_equiv_check(spec: &WeightSpec, x_levels: u32) -> Result<Vec<(f64, f64)>> {
    (0..=x_levels)
        .map(|k| {
            let x = 2f64.powi(k as i32);
            let p = Radius::from_delta(1.0 / x)?;
            Ok((x, (spec.ln_moment(x)? - spec.ln_tail(p)?).exp()))
        })
        .collect()
}

/// Direction of a monotone multiplicative factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotone {
    NonDecreasing,
    NonIncreasing,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductCheck {
    pub base: ClassificationReport,
    pub product: ClassificationReport,
    pub direction: Monotone,
    /// `None` when the base does not meet the hypothesis.
    pub implication_holds: Option<bool>,
}

/// Classify `base · factor` and test that membership is inherited:
/// D̂ under non-decreasing factors, Ď under non-increasing ones.
pub fn monotone_product_check(
    base: &WeightSpec,
    factor: &WeightSpec,
    direction: Monotone,
    opts: &ClassifyOptions,
) -> Result<ProductCheck> {
    let product = WeightSpec::product(base.clone(), factor.clone());
    let b = classify(base, opts)?;
    let p = classify(&product, opts)?;
    let implication_holds = match direction {
        Monotone::NonDecreasing => {
            (b.dhat.verdict == Membership::Member).then_some(p.dhat.verdict == Membership::Member)
        }
        Monotone::NonIncreasing => {
            (b.dcheck.verdict == Membership::Member).then_some(p.dcheck.verdict == Membership::Member)
        }
    };
    Ok(ProductCheck {
        base: b,
        product: p,
        direction,
        implication_holds,
    })
}

/// Trace `∫_r^1 ω ν̂ / (ω̂(r) ν̂(r))` at `r = 1 - 2^{-n}`.
pub fn product_tail_equiv_check(omega: &WeightSpec, nu: &WeightSpec, levels: &[u32]) -> Result<Vec<f64>> {
    let prod = WeightSpec::product(omega.clone(), WeightSpec::tail_of(nu.clone(), 1.0));
    levels
        .iter()
        .map(|&n| {
            let p = Radius::dyadic(n as f64);
            Ok((prod.ln_tail(p)? - omega.ln_tail(p)? - nu.ln_tail(p)?).exp())
        })
        .collect()
}
