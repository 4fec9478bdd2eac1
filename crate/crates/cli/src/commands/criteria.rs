use bergman::criteria::{
    bloch_norm_scan, hinf_norm_scan, moment_criterion_scan, necessary_moment_condition, tail_criterion_scan,
    CriterionId, CriterionReport, ScanOptions,
};
use bergman::expweights::{hinf_split_scan, FamilyScan};
use bergman::weights::WeightSpec;
use serde::{Deserialize, Serialize};

use super::{emit_trace, scan_options, scan_tolerances, tag, Ctx, Outcome, ScanTuning};
use crate::error::{CliError, Result};
use crate::output::{f, OutputDir, Table};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriteriaConfig {
    pub omega: WeightSpec,
    /// Enters the moment, tail and necessary-moment criteria through `ν̂`.
    pub nu: Option<WeightSpec>,
    /// Growth function of the norm scans; defaults to `ν̂`.
    pub v: Option<WeightSpec>,
    #[serde(default = "default_criteria")]
    pub criteria: Vec<CriterionId>,
    pub depth: Option<u32>,
    pub tol: Option<f64>,
    #[serde(default)]
    pub scan: ScanTuning,
}

fn default_criteria() -> Vec<CriterionId> {
    vec![CriterionId::Moment, CriterionId::Tail]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    pub omega: WeightSpec,
    pub nu: Option<WeightSpec>,
    pub v: Option<WeightSpec>,
    #[serde(default = "default_norms")]
    pub norms: Vec<NormKind>,
    /// Split the H∞ functional at `|ζ| = (1+a)/2`.
    #[serde(default = "yes")]
    pub split: bool,
    pub depth: Option<u32>,
    pub tol: Option<f64>,
    #[serde(default)]
    pub scan: ScanTuning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Hinf,
    Bloch,
}

fn default_norms() -> Vec<NormKind> {
    vec![NormKind::Hinf, NormKind::Bloch]
}

fn yes() -> bool {
    true
}

fn growth(v: &Option<WeightSpec>, nu: &Option<WeightSpec>) -> Result<WeightSpec> {
    match (v, nu) {
        (Some(v), _) => {
            v.validate().map_err(CliError::core("v"))?;
            Ok(v.clone())
        }
        (None, Some(nu)) => Ok(WeightSpec::tail_of(nu.clone(), 1.0)),
        (None, None) => Err(CliError::Usage("field `v`: norm scans need `v` or `nu`".into())),
    }
}

fn summary(reports: &[&CriterionReport]) -> String {
    reports
        .iter()
        .map(|r| format!("{}={}", r.criterion.name(), tag(&r.verdict)))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn run(ctx: &mut Ctx) -> Result<Outcome> {
    let cfg: CriteriaConfig = ctx.raw.bind()?;
    if cfg.criteria.is_empty() {
        return Err(CliError::Usage("field `criteria`: empty list".into()));
    }
    cfg.omega.validate().map_err(CliError::core("omega"))?;
    if let Some(nu) = &cfg.nu {
        nu.validate().map_err(CliError::core("nu"))?;
    }
    let opts = scan_options(cfg.depth, cfg.tol, &cfg.scan, ctx.exec)?;
    let mut reports = Vec::new();
    for &id in &cfg.criteria {
        let r = match id {
            CriterionId::Hinf | CriterionId::Bloch => {
                let v = growth(&cfg.v, &cfg.nu)?;
                let scan = if id == CriterionId::Hinf { hinf_norm_scan } else { bloch_norm_scan };
                scan(&cfg.omega, &v, &opts)
            }
            _ => {
                let nu = cfg.nu.as_ref().ok_or_else(|| {
                    CliError::Usage(format!("field `nu`: required by criterion `{}`", id.name()))
                })?;
                let scan = match id {
                    CriterionId::Moment => moment_criterion_scan,
                    CriterionId::Tail => tail_criterion_scan,
                    _ => necessary_moment_condition,
                };
                scan(&cfg.omega, nu, &opts)
            }
        }
        .map_err(CliError::core(id.name()))?;
        reports.push(r);
    }
    ctx.out.report("criteria", &serde_json::json!({ "reports": reports }))?;
    for r in &reports {
        emit_trace(&mut ctx.out, &format!("criterion_{}", r.criterion.name()), r)?;
    }
    Ok(Outcome::ok(summary(&reports.iter().collect::<Vec<_>>()), scan_tolerances(&opts)))
}

pub fn run_norm(ctx: &mut Ctx) -> Result<Outcome> {
    let cfg: NormConfig = ctx.raw.bind()?;
    if cfg.norms.is_empty() {
        return Err(CliError::Usage("field `norms`: empty list".into()));
    }
    cfg.omega.validate().map_err(CliError::core("omega"))?;
    if let Some(nu) = &cfg.nu {
        nu.validate().map_err(CliError::core("nu"))?;
    }
    let v = growth(&cfg.v, &cfg.nu)?;
    let opts = scan_options(cfg.depth, cfg.tol, &cfg.scan, ctx.exec)?;
    let mut hinf: Option<FamilyScan> = None;
    let mut bloch = None;
    for kind in &cfg.norms {
        match kind {
            NormKind::Hinf if cfg.split => hinf = Some(hinf_split_scan(&cfg.omega, &v, &opts).map_err(CliError::core("hinf"))?),
            NormKind::Hinf => hinf = Some(bare(hinf_norm_scan(&cfg.omega, &v, &opts).map_err(CliError::core("hinf"))?)),
            NormKind::Bloch => bloch = Some(bloch_norm_scan(&cfg.omega, &v, &opts).map_err(CliError::core("bloch"))?),
        }
    }
    ctx.out.report("norm", &serde_json::json!({ "hinf": hinf, "bloch": bloch }))?;
    let mut done = Vec::new();
    if let Some(h) = &hinf {
        emit_trace(&mut ctx.out, "norm_hinf", &h.report)?;
        if cfg.split {
            emit_split(&mut ctx.out, "norm_hinf_split.csv", h)?;
        }
        done.push(&h.report);
    }
    if let Some(b) = &bloch {
        emit_trace(&mut ctx.out, "norm_bloch", b)?;
        done.push(b);
    }
    Ok(Outcome::ok(summary(&done), scan_tolerances(&opts)))
}

fn bare(report: CriterionReport) -> FamilyScan {
    FamilyScan {
        omega: report.omega.clone(),
        v: report.second.clone(),
        report,
        split: Vec::new(),
        dhat_constant: None,
        inner_ratio_max: None,
        notes: Vec::new(),
    }
}

pub fn emit_split(out: &mut OutputDir, name: &str, s: &FamilyScan) -> Result<()> {
    let mut t = Table::new(&["a", "inner", "outer", "total"]);
    for row in &s.split {
        t.push(vec![f(row.a), f(row.inner), f(row.outer), f(row.inner + row.outer)]);
    }
    out.csv(name, &t)
}

/// Used by `expcheck` for scans that come with their own options.
pub fn family_outcome(scans: &[(String, FamilyScan)], opts: &ScanOptions) -> Outcome {
    let s = scans
        .iter()
        .map(|(k, s)| format!("{k}={}", tag(&s.report.verdict)))
        .collect::<Vec<_>>()
        .join(" ");
    Outcome::ok(s, scan_tolerances(opts))
}
