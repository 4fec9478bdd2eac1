//! Cross-check of the criteria against each other and against the weight
//! classes on a list of `(ω, ν)` pairs.
//!
//! For `ν ∈ D̂` the following statements must agree:
//!
//! 1. the H∞ functional with `v = ν̂` is bounded;
//! 2. `ν ∈ Ď` and the moment criterion is bounded;
//! 3. `ν ∈ Ď` and the tail criterion is bounded;
//! 4. `ν ∈ Ď` and `ω/ν̂ ∈ D`;
//!
//! and the Bloch functional is bounded exactly when the moment criterion is.
//! Pairs with `ν ∉ D̂` are reported as out of hypothesis.

use serde::Serialize;

use super::norms::NormScanner;
use super::single::{moment_criterion_scan, tail_criterion_scan};
use super::{CriterionReport, ScanOptions};
use crate::classify::{classify, ClassifyOptions, Membership};
use crate::error::{Error, Result};
use crate::scan::Verdict;
use crate::weights::{make_omega_nu, omega_over_nu_hat, WeightSpec};

#[derive(Debug, Clone, Default)]
pub struct MatrixOptions {
    pub scan: ScanOptions,
    pub classify: ClassifyOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EquivalenceCheck {
    pub hinf_bounded: Option<bool>,
    pub moment_condition: Option<bool>,
    pub tail_condition: Option<bool>,
    pub class_condition: Option<bool>,
    pub bloch_matches_moment: Option<bool>,
}

impl EquivalenceCheck {
    /// `None` when a statement is inconclusive.
    pub fn consistent(&self) -> Option<bool> {
        let conds = [self.hinf_bounded, self.moment_condition, self.tail_condition, self.class_condition];
        if conds.iter().any(Option::is_none) || self.bloch_matches_moment.is_none() {
            return None;
        }
        Some(conds.iter().all(|c| *c == conds[0]) && self.bloch_matches_moment == Some(true))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixRow {
    pub label: String,
    pub omega: WeightSpec,
    pub nu: WeightSpec,
    pub nu_dhat: Membership,
    pub nu_dcheck: Membership,
    pub omega_d: Membership,
    pub quotient_d: Membership,
    pub moment: CriterionReport,
    pub tail: CriterionReport,
    pub hinf: CriterionReport,
    pub bloch: CriterionReport,
    pub in_hypothesis: bool,
    pub check: EquivalenceCheck,
    /// `Some(false)` is an inconsistency; `None` is inconclusive or out of hypothesis.
    pub consistent: Option<bool>,
    pub notes: Vec<String>,
}

fn bounded(v: Verdict) -> Option<bool> {
    match v {
        Verdict::Bounded => Some(true),
        Verdict::Divergent => Some(false),
        Verdict::Inconclusive => None,
    }
}

fn member(m: Membership) -> Option<bool> {
    match m {
        Membership::Member => Some(true),
        Membership::NonMember => Some(false),
        Membership::Inconclusive => None,
    }
}

fn and(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

/// `D` membership; a non-integrable weight is not in any class.
fn d_class(spec: &WeightSpec, opts: &ClassifyOptions, notes: &mut Vec<String>) -> Result<Membership> {
    match classify(spec, opts) {
        Ok(r) => Ok(r.d_verdict),
        Err(Error::Divergent(_)) => {
            notes.push(format!("{} is not integrable near the boundary", spec.label()));
            Ok(Membership::NonMember)
        }
        Err(e) => Err(e),
    }
}

/// The pairs `(label, ω, ν)` of the built-in matrix. Every `ν` is in `D̂`.
pub fn builtin_pairs() -> Vec<(String, WeightSpec, WeightSpec)> {
    let std = WeightSpec::standard;
    let logp = WeightSpec::log_perturbed(-1.0, -2.0);
    vec![
        ("std1/std0".into(), std(1.0), std(0.0)),
        ("std2/std0".into(), std(2.0), std(0.0)),
        ("std2/std1".into(), std(2.0), std(1.0)),
        ("std0/std0".into(), std(0.0), std(0.0)),
        ("std1/std2".into(), std(1.0), std(2.0)),
        ("omega_nu(std0)/std0".into(), make_omega_nu(&std(0.0)), std(0.0)),
        ("std0/logp".into(), std(0.0), logp.clone()),
        ("omega_nu(logp)/logp".into(), make_omega_nu(&logp), logp),
    ]
}

pub fn matrix_row(label: &str, omega: &WeightSpec, nu: &WeightSpec, opts: &MatrixOptions) -> Result<MatrixRow> {
    let mut notes = Vec::new();
    let nu_class = classify(nu, &opts.classify)?;
    let omega_d = d_class(omega, &opts.classify, &mut notes)?;
    let quotient_d = d_class(&omega_over_nu_hat(omega, nu), &opts.classify, &mut notes)?;
    let moment = moment_criterion_scan(omega, nu, &opts.scan)?;
    let tail = tail_criterion_scan(omega, nu, &opts.scan)?;
    let v = WeightSpec::tail_of(nu.clone(), 1.0);
    let scanner = NormScanner::new(omega, &opts.scan)?;
    let hinf = scanner.hinf_scan(&v)?;
    let bloch = scanner.bloch_scan(&v)?;

    let nu_dcheck = member(nu_class.dcheck.verdict);
    let check = EquivalenceCheck {
        hinf_bounded: bounded(hinf.verdict),
        moment_condition: and(nu_dcheck, bounded(moment.verdict)),
        tail_condition: and(nu_dcheck, bounded(tail.verdict)),
        class_condition: and(nu_dcheck, member(quotient_d)),
        bloch_matches_moment: match (bounded(bloch.verdict), bounded(moment.verdict)) {
            (Some(a), Some(b)) => Some(a == b),
            _ => None,
        },
    };
    let in_hypothesis = nu_class.dhat.verdict == Membership::Member;
    if !in_hypothesis {
        notes.push("ν is not classified in D̂: out of hypothesis, no implication asserted".into());
    }
    Ok(MatrixRow {
        label: label.to_string(),
        omega: omega.clone(),
        nu: nu.clone(),
        nu_dhat: nu_class.dhat.verdict,
        nu_dcheck: nu_class.dcheck.verdict,
        omega_d,
        quotient_d,
        moment,
        tail,
        hinf,
        bloch,
        in_hypothesis,
        consistent: if in_hypothesis { check.consistent() } else { None },
        check,
        notes,
    })
}

pub fn equivalence_matrix(pairs: &[(String, WeightSpec, WeightSpec)], opts: &MatrixOptions) -> Result<Vec<MatrixRow>> {
    pairs
        .iter()
        .map(|(label, omega, nu)| matrix_row(label, omega, nu, opts))
        .collect()
}
