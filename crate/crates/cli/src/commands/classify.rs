use bergman::classify::{classify, ClassifyOptions};
use bergman::weights::WeightSpec;
use serde::Deserialize;

use super::{positive, tag, Ctx, Outcome};
use crate::error::{CliError, Result};
use crate::output::{f, Table};
use crate::svg::{loglog, Series};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub weight: WeightSpec,
    pub depth: Option<u32>,
    pub x_levels: Option<u32>,
    pub margin: Option<f64>,
    pub k_grid: Option<Vec<f64>>,
    pub gammas: Option<Vec<f64>>,
    pub window: Option<usize>,
}

pub fn run(ctx: &mut Ctx) -> Result<Outcome> {
    let cfg: ClassifyConfig = ctx.raw.bind()?;
    cfg.weight.validate().map_err(CliError::core("weight"))?;
    let mut o = ClassifyOptions {
        exec: ctx.exec,
        ..ClassifyOptions::default()
    };
    o.depth = cfg.depth.unwrap_or(o.depth);
    o.x_levels = cfg.x_levels.unwrap_or(o.x_levels);
    o.window = cfg.window.unwrap_or(o.window);
    if let Some(m) = cfg.margin {
        o.margin = positive("margin", m)?;
    }
    if let Some(k) = cfg.k_grid {
        if k.iter().any(|&k| !(k > 1.0)) {
            return Err(CliError::Usage("field `k_grid`: every K must exceed 1".into()));
        }
        o.k_grid = k;
    }
    if let Some(g) = cfg.gammas {
        for &x in &g {
            positive("gammas", x)?;
        }
        o.gammas = g;
    }

    let rep = classify(&cfg.weight, &o).map_err(CliError::core("weight"))?;
    ctx.out.report("classify", &rep)?;

    let mut dy = Table::new(&["n", "r", "tail", "ratio"]);
    for row in &rep.dhat.rows {
        dy.push(vec![row.n.to_string(), f(row.r), f(row.ln_tail.exp()), f(row.ratio)]);
    }
    ctx.out.csv("classify_dyadic.csv", &dy)?;

    let mut k = Table::new(&["k", "n", "ratio"]);
    for tr in &rep.dcheck.per_k {
        for (n, ratio) in tr.levels.iter().zip(&tr.ratio) {
            k.push(vec![f(tr.k), n.to_string(), f(*ratio)]);
        }
    }
    ctx.out.csv("classify_dcheck.csv", &k)?;

    let mut m = Table::new(&["x", "ratio"]);
    for (x, ratio) in rep.dhat.moment.x.iter().zip(&rep.dhat.moment.ratio) {
        m.push(vec![f(*x), f(*ratio)]);
    }
    ctx.out.csv("classify_moment.csv", &m)?;

    let tail: Vec<(f64, f64)> = rep.dhat.rows.iter().map(|r| (1.0 / (1.0 - r.r), r.ln_tail.exp())).collect();
    ctx.out.svg(
        "classify_tail.svg",
        &loglog(&cfg.weight.label(), "1/(1-r)", "tail", &[Series { name: "tail", points: tail }]),
    )?;

    let summary = format!(
        "{}: dhat={} dcheck={} d={}",
        cfg.weight.label(),
        tag(&rep.dhat.verdict),
        tag(&rep.dcheck.verdict),
        tag(&rep.d_verdict)
    );
    let tol = serde_json::json!({
        "depth": o.depth,
        "x_levels": o.x_levels,
        "margin": o.margin,
        "k_grid": o.k_grid,
        "gammas": o.gammas,
        "window": o.window,
        "rules": o.rules,
    });
    Ok(Outcome::ok(summary, tol))
}
