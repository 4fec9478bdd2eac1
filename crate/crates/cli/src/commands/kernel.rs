use bergman::kernel::{KernelEvaluator, KernelOptions, KernelValue};
use bergman::weights::WeightSpec;
use serde::{Deserialize, Serialize};

use super::{complex, positive, Ctx, Outcome, PointPair};
use crate::error::{CliError, Result};
use crate::output::{f, Table};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub weight: WeightSpec,
    pub points: Vec<PointPair>,
    /// Also evaluate `∂_z B(z, ζ)`.
    #[serde(default = "yes")]
    pub derivative: bool,
    pub tol: Option<f64>,
    pub options: Option<KernelOptions>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Serialize)]
struct Row {
    #[serde(flatten)]
    at: PointPair,
    kernel: KernelValue,
    derivative: Option<KernelValue>,
}

pub fn run(ctx: &mut Ctx) -> Result<Outcome> {
    let cfg: KernelConfig = ctx.raw.bind()?;
    cfg.weight.validate().map_err(CliError::core("weight"))?;
    if cfg.points.is_empty() {
        return Err(CliError::Usage("field `points`: empty list".into()));
    }
    let tol = positive("tol", cfg.tol.unwrap_or(1e-12))?;
    let kopts = cfg.options.unwrap_or_default();
    let k = KernelEvaluator::new(&cfg.weight, kopts).map_err(CliError::core("weight"))?;

    let mut rows = Vec::new();
    for (i, p) in cfg.points.iter().enumerate() {
        let field = format!("points[{i}]");
        let (z, zeta) = (complex(p.z), complex(p.zeta));
        let kernel = k.eval(z, zeta, tol).map_err(CliError::core(&field))?;
        let derivative = if cfg.derivative {
            Some(k.deriv(z, zeta, tol).map_err(CliError::core(&field))?)
        } else {
            None
        };
        rows.push(Row { at: *p, kernel, derivative });
    }
    ctx.out.report("kernel", &serde_json::json!({ "weight": cfg.weight, "tol": tol, "rows": rows }))?;

    let mut t = Table::new(&[
        "z_re", "z_im", "zeta_re", "zeta_im", "value_re", "value_im", "error", "terms", "deriv_re", "deriv_im",
        "deriv_error", "deriv_terms",
    ]);
    println!("{:>24} {:>24} {:>10} {:>7}", "re B", "im B", "error", "terms");
    for r in &rows {
        let KernelValue { value, error, terms } = r.kernel;
        println!("{:>24e} {:>24e} {:>10.2e} {:>7}", value.re, value.im, error, terms);
        let d = r.derivative.map_or([String::new(), String::new(), String::new(), String::new()], |d| {
            [f(d.value.re), f(d.value.im), f(d.error), d.terms.to_string()]
        });
        let mut cells = vec![
            f(r.at.z[0]),
            f(r.at.z[1]),
            f(r.at.zeta[0]),
            f(r.at.zeta[1]),
            f(value.re),
            f(value.im),
            f(error),
            terms.to_string(),
        ];
        cells.extend(d);
        t.push(cells);
    }
    ctx.out.csv("kernel.csv", &t)?;
    let tolerances = serde_json::json!({ "tol": tol, "kernel": kopts });
    Ok(Outcome::ok(format!("{} kernel values", rows.len()), tolerances))
}
