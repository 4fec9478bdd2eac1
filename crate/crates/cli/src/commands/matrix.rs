use bergman::classify::ClassifyOptions;
use bergman::criteria::{builtin_pairs, equivalence_matrix, MatrixOptions};
use bergman::weights::WeightSpec;
use serde::Deserialize;

use super::{scan_options, scan_tolerances, tag, Ctx, Outcome, ScanTuning};
use crate::error::{CliError, Result};
use crate::output::{f, Table};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    /// Defaults to the built-in pairs.
    pub pairs: Option<Vec<PairConfig>>,
    pub depth: Option<u32>,
    pub tol: Option<f64>,
    #[serde(default)]
    pub scan: ScanTuning,
    /// Depth of the class verdicts; `depth` only drives the scans.
    pub classify_depth: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub label: String,
    pub omega: WeightSpec,
    pub nu: WeightSpec,
}

fn opt_bool(b: Option<bool>) -> String {
    b.map_or("inconclusive".into(), |b| b.to_string())
}

pub fn run(ctx: &mut Ctx) -> Result<Outcome> {
    let cfg: MatrixConfig = ctx.raw.bind()?;
    let pairs = match cfg.pairs {
        None => builtin_pairs(),
        Some(p) if p.is_empty() => return Err(CliError::Usage("field `pairs`: empty list".into())),
        Some(p) => {
            let mut out = Vec::new();
            for (i, p) in p.into_iter().enumerate() {
                p.omega.validate().map_err(CliError::core(&format!("pairs[{i}].omega")))?;
                p.nu.validate().map_err(CliError::core(&format!("pairs[{i}].nu")))?;
                out.push((p.label, p.omega, p.nu));
            }
            out
        }
    };
    let scan = scan_options(cfg.depth, cfg.tol, &cfg.scan, ctx.exec)?;
    let mut classify = ClassifyOptions {
        exec: ctx.exec,
        ..ClassifyOptions::default()
    };
    if let Some(d) = cfg.classify_depth {
        classify.depth = d;
    }
    let opts = MatrixOptions { scan, classify };
    let rows = equivalence_matrix(&pairs, &opts).map_err(CliError::core("pairs"))?;
    ctx.out.report("matrix", &serde_json::json!({ "rows": rows }))?;

    let mut t = Table::new(&[
        "label", "nu_dhat", "nu_dcheck", "omega_d", "quotient_d", "moment", "tail", "hinf", "bloch", "in_hypothesis",
        "consistent",
    ]);
    let mut traces = Table::new(&["label", "criterion", "level", "point", "trace", "running_sup"]);
    for r in &rows {
        t.push(vec![
            r.label.clone(),
            tag(&r.nu_dhat),
            tag(&r.nu_dcheck),
            tag(&r.omega_d),
            tag(&r.quotient_d),
            tag(&r.moment.verdict),
            tag(&r.tail.verdict),
            tag(&r.hinf.verdict),
            tag(&r.bloch.verdict),
            r.in_hypothesis.to_string(),
            opt_bool(r.consistent),
        ]);
        for c in [&r.moment, &r.tail, &r.hinf, &r.bloch] {
            for i in 0..c.trace.len() {
                traces.push(vec![
                    r.label.clone(),
                    c.criterion.name().to_string(),
                    f(c.levels[i]),
                    f(c.points[i]),
                    f(c.trace[i]),
                    f(c.running_sup[i]),
                ]);
            }
        }
    }
    ctx.out.csv("matrix.csv", &t)?;
    ctx.out.csv("matrix_traces.csv", &traces)?;

    let bad: Vec<&str> = rows.iter().filter(|r| r.consistent == Some(false)).map(|r| r.label.as_str()).collect();
    let open = rows.iter().filter(|r| r.consistent.is_none()).count();
    let summary = format!(
        "{} pairs: {} consistent, {} inconsistent, {} inconclusive or out of hypothesis",
        rows.len(),
        rows.len() - bad.len() - open,
        bad.len(),
        open
    );
    let mut tol = scan_tolerances(&opts.scan);
    tol["classify_depth"] = opts.classify.depth.into();
    let mut out = Outcome::ok(summary, tol);
    if !bad.is_empty() {
        out.inconsistency = Some(format!("criteria disagree on {}", bad.join(", ")));
    }
    Ok(out)
}
