//! Boundedness criteria for the Bergman projection `P_ω` on growth and
//! Bloch-type spaces, evaluated as finite traces and judged by [`crate::scan`].
//!
//! Traces are computed in logarithmic form so that divergent mixed integrals
//! (`+∞`) and very large values flow through the verdict rules unchanged.

mod hardy;
mod matrix;
mod norms;
mod single;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::scan::{assess_ln, GrowthFit, Verdict, VerdictRules};
use crate::weights::WeightSpec;

pub use hardy::{hardy_lower_bound_check, HardyRow};
pub use matrix::{builtin_pairs, equivalence_matrix, matrix_row, MatrixOptions, MatrixRow, EquivalenceCheck};
pub use norms::{bloch_norm_scan, hinf_norm_scan, NormScanner};
pub use single::{moment_criterion_scan, necessary_moment_condition, tail_criterion_scan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionId {
    Moment,
    Tail,
    Hinf,
    Bloch,
    NecessaryMoment,
}

impl CriterionId {
    pub fn name(self) -> &'static str {
        match self {
            CriterionId::Moment => "moment",
            CriterionId::Tail => "tail",
            CriterionId::Hinf => "hinf",
            CriterionId::Bloch => "bloch",
            CriterionId::NecessaryMoment => "necessary_moment",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "moment" => CriterionId::Moment,
            "tail" => CriterionId::Tail,
            "hinf" => CriterionId::Hinf,
            "bloch" => CriterionId::Bloch,
            "necessary_moment" | "necessary" => CriterionId::NecessaryMoment,
            _ => return Err(Error::Parameter(format!("unknown criterion `{s}`"))),
        })
    }
}

/// What the second weight of a pair stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondRole {
    /// `ν`, entering through `ν̂`.
    Nu,
    /// The growth function `v` itself.
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// `x = 2^k`.
    DyadicExponent,
    /// `r = 1 - 2^{-k}`.
    DyadicRadius,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub criterion: CriterionId,
    pub omega: WeightSpec,
    pub second: WeightSpec,
    pub second_role: SecondRole,
    pub grid: GridKind,
    pub levels: Vec<f64>,
    /// The `x` or `r` values.
    pub points: Vec<f64>,
    pub trace: Vec<f64>,
    pub running_sup: Vec<f64>,
    pub verdict: Verdict,
    pub octave_increase: f64,
    pub fit: Option<GrowthFit>,
    pub notes: Vec<String>,
}

impl CriterionReport {
    #[allow(clippy::too_many_arguments)]
    fn from_ln(
        criterion: CriterionId,
        omega: &WeightSpec,
        second: &WeightSpec,
        second_role: SecondRole,
        grid: GridKind,
        levels: Vec<u32>,
        ln_trace: &[f64],
        rules: &VerdictRules,
    ) -> Self {
        let lv: Vec<f64> = levels.iter().map(|&k| k as f64).collect();
        let a = assess_ln(&lv, ln_trace, rules);
        let points = levels
            .iter()
            .map(|&k| match grid {
                GridKind::DyadicExponent => 2f64.powi(k as i32),
                GridKind::DyadicRadius => 1.0 - 2f64.powi(-(k as i32)),
            })
            .collect();
        Self {
            criterion,
            omega: omega.clone(),
            second: second.clone(),
            second_role,
            grid,
            levels: lv,
            points,
            trace: ln_trace.iter().map(|v| v.exp()).collect(),
            running_sup: a.running_sup,
            verdict: a.verdict,
            octave_increase: a.octave_increase,
            fit: a.fit,
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Exponent levels `x = 2^k`, `k = 0..=x_levels`.
    pub x_levels: u32,
    /// Radius levels of single-layer scans.
    pub radius_depth: u32,
    /// Radius levels of kernel-norm scans.
    pub norm_depth: u32,
    /// Relative tolerance of doubly nested integrals.
    pub tol: f64,
    /// Grid step in `u = -ln(1-t)` of circle-mean tables.
    pub table_step: f64,
    pub rules: VerdictRules,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            x_levels: 20,
            radius_depth: 40,
            norm_depth: 12,
            tol: 1e-6,
            table_step: 1.0 / 32.0,
            rules: VerdictRules::default(),
            exec: Execution::default(),
        }
    }
}

/// `ln` of a quantity whose divergence is a legitimate outcome.
fn ln_or_infinite(r: Result<f64>) -> Result<f64> {
    match r {
        Err(Error::Divergent(_)) => Ok(f64::INFINITY),
        other => other,
    }
}
