//! Verdicts on finite traces of asymptotic quantities.
//!
//! A trace is a sequence `y_k` indexed by a level `k` (dyadic radius level or
//! dyadic exponent level). The *final octave* consists of the levels
//! `k >= k_max / 2`. A trace is bounded when its running sup grows by less
//! than a fixed fraction over the final octave, and divergent when a growth
//! model fitted on the final octave has positive slope and high `R²`. A trace
//! whose final-octave increments shrink geometrically also counts as bounded,
//! since its remaining increase is then finite.

use serde::{Deserialize, Serialize};

use crate::numeric::fit::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Divergent,
    Inconclusive,
}

/// Growth of `y` against the level `k`, where `k` is proportional to
/// `-log(1-r)` (or to `log x`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    /// `y ≈ c`.
    Constant,
    /// `y ≈ a + b k`.
    Log,
    /// `ln y ≈ a + b k`.
    Power,
    /// `ln ln y ≈ a + b k`.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub model: GrowthModel,
    pub slope: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictRules {
    /// Largest relative increase of the running sup over the final octave
    /// that still counts as bounded.
    pub octave_growth: f64,
    /// Minimum `R²` of a growth fit for a divergent verdict.
    pub min_r2: f64,
    /// Largest per-level ratio of geometrically shrinking increments that
    /// still counts as bounded; `0` disables the rule.
    pub increment_ratio: f64,
}

impl Default for VerdictRules {
    fn default() -> Self {
        Self {
            octave_growth: 0.02,
            min_r2: 0.99,
            increment_ratio: 0.75,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub verdict: Verdict,
    pub running_sup: Vec<f64>,
    /// `sup_end / sup_at_octave_start - 1`.
    pub octave_increase: f64,
    pub fit: Option<GrowthFit>,
    /// Fitted per-level ratio of the final-octave increments, when they are
    /// all positive.
    pub increment_ratio: Option<f64>,
}

/// Assess a trace of positive values given in logarithmic form.
pub fn assess_ln(levels: &[f64], ln_values: &[f64], rules: &VerdictRules) -> Assessment {
    assert_eq!(levels.len(), ln_values.len());
    let n = levels.len();
    let mut running = Vec::with_capacity(n);
    let mut sup = f64::NEG_INFINITY;
    for &v in ln_values {
        if v > sup || v.is_nan() {
            sup = v;
        }
        running.push(sup);
    }
    let running_sup: Vec<f64> = running.iter().map(|v| v.exp()).collect();
    if n == 0 {
        return Assessment {
            verdict: Verdict::Inconclusive,
            running_sup,
            octave_increase: f64::NAN,
            fit: None,
            increment_ratio: None,
        };
    }
    if ln_values.contains(&f64::INFINITY) {
        return Assessment {
            verdict: Verdict::Divergent,
            running_sup,
            octave_increase: f64::INFINITY,
            fit: None,
            increment_ratio: None,
        };
    }
    if ln_values.iter().any(|v| v.is_nan()) {
        return Assessment {
            verdict: Verdict::Inconclusive,
            running_sup,
            octave_increase: f64::NAN,
            fit: None,
            increment_ratio: None,
        };
    }
    let k_max = levels[n - 1];
    let start = levels.iter().rposition(|&k| k <= 0.5 * k_max).unwrap_or(0);
    let octave_increase = (running[n - 1] - running[start]).exp_m1();
    let tail = &levels[start..];
    let tail_ln = &ln_values[start..];
    let fit = best_growth_fit(tail, tail_ln);
    let increments = increment_fit(tail, tail_ln);
    let shrinking = increments.is_some_and(|(ratio, r2)| ratio <= rules.increment_ratio && r2 > rules.min_r2);
    let verdict = if octave_increase < rules.octave_growth || shrinking {
        Verdict::Bounded
    } else if fit.is_some_and(|f| f.model != GrowthModel::Constant && f.slope > 0.0 && f.r2 > rules.min_r2) {
        Verdict::Divergent
    } else {
        Verdict::Inconclusive
    };
    Assessment {
        verdict,
        running_sup,
        octave_increase,
        fit,
        increment_ratio: increments.map(|i| i.0),
    }
}

/// Per-level ratio and `R²` of a log-linear fit to positive increments.
fn increment_fit(levels: &[f64], ln_values: &[f64]) -> Option<(f64, f64)> {
    if levels.len() < 4 {
        return None;
    }
    let mut ks = Vec::new();
    let mut ln_inc = Vec::new();
    for i in 1..levels.len() {
        let d = ln_values[i].exp() - ln_values[i - 1].exp();
        if !(d > 0.0 && d.is_finite()) {
            return None;
        }
        ks.push(levels[i]);
        ln_inc.push(d.ln());
    }
    let f = linear_fit(&ks, &ln_inc)?;
    let step = levels[1] - levels[0];
    Some(((f.slope * step).exp(), f.r2))
}

/// Best of the log, power and exponential growth models on `(k, ln y)`.
pub fn best_growth_fit(levels: &[f64], ln_values: &[f64]) -> Option<GrowthFit> {
    if levels.len() < 3 {
        return None;
    }
    let lin: Vec<f64> = ln_values.iter().map(|v| v.exp()).collect();
    let mut fits = Vec::new();
    if lin.iter().all(|v| v.is_finite()) {
        if let Some(f) = linear_fit(levels, &lin) {
            fits.push((GrowthModel::Log, f));
        }
    }
    if let Some(f) = linear_fit(levels, ln_values) {
        fits.push((GrowthModel::Power, f));
    }
    if ln_values.iter().all(|v| *v > 0.0) {
        let ll: Vec<f64> = ln_values.iter().map(|v| v.ln()).collect();
        if let Some(f) = linear_fit(levels, &ll) {
            fits.push((GrowthModel::Exponential, f));
        }
    }
    let spread = ln_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ln_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < 1e-9 {
        return Some(GrowthFit {
            model: GrowthModel::Constant,
            slope: 0.0,
            r2: 1.0,
        });
    }
    fits.into_iter()
        .filter(|(_, f)| f.r2.is_finite())
        .max_by(|a, b| a.1.r2.total_cmp(&b.1.r2))
        .map(|(model, f)| GrowthFit {
            model,
            slope: f.slope,
            r2: f.r2,
        })
}
