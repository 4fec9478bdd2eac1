use bergman::projection::{szego_check_with, szego_points, PolarMesh, SzegoMethod};
use bergman::weights::WeightSpec;
use serde::Deserialize;

use super::{complex, positive, Ctx, Outcome, Point};
use crate::error::{CliError, Result};
use crate::output::{f, Table};
use crate::svg::{loglog, Series};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SzegoConfig {
    #[serde(default = "unweighted")]
    pub weight: WeightSpec,
    /// Modes `-M..=M`; `--depth` sets it.
    pub depth: Option<u32>,
    pub tol: Option<f64>,
    #[serde(default)]
    pub method: MethodName,
    /// Only read by the sampled method.
    pub mesh: Option<PolarMesh>,
    pub points: Option<Vec<Point>>,
    /// Largest acceptable deviation; above it the run reports an inconsistency.
    pub max_deviation: Option<f64>,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    #[default]
    Modes,
    Sampled,
}

fn unweighted() -> WeightSpec {
    WeightSpec::standard(0.0)
}

pub fn run(ctx: &mut Ctx) -> Result<Outcome> {
    let cfg: SzegoConfig = ctx.raw.bind()?;
    cfg.weight.validate().map_err(CliError::core("weight"))?;
    let m = cfg.depth.unwrap_or(8);
    let tol = positive("tol", cfg.tol.unwrap_or(1e-12))?;
    let limit = positive("max_deviation", cfg.max_deviation.unwrap_or(1e-8))?;
    let method = match (cfg.method, cfg.mesh) {
        (MethodName::Modes, None) => SzegoMethod::Modes,
        (MethodName::Modes, Some(_)) => {
            return Err(CliError::Usage("field `mesh`: only used with method = \"sampled\"".into()))
        }
        (MethodName::Sampled, mesh) => {
            let mesh = mesh.unwrap_or_default();
            mesh.validate().map_err(CliError::core("mesh"))?;
            SzegoMethod::Sampled { mesh }
        }
    };
    let points = match &cfg.points {
        Some(p) if p.is_empty() => return Err(CliError::Usage("field `points`: empty list".into())),
        Some(p) => p.iter().map(|&p| complex(p)).collect(),
        None => szego_points(),
    };
    let chk = szego_check_with(&cfg.weight, m, tol, method, &points, ctx.exec).map_err(CliError::core("weight"))?;
    ctx.out.report("szego", &chk)?;

    let mut header = vec!["m".to_string()];
    header.extend((0..points.len()).map(|j| format!("z{j}")));
    let mut t = Table { header, rows: Vec::new() };
    for (mode, row) in chk.modes.iter().zip(&chk.deviation) {
        let mut cells = vec![mode.to_string()];
        cells.extend(row.iter().map(|d| f(*d)));
        t.push(cells);
    }
    ctx.out.csv("szego.csv", &t)?;
    let mut g = Table::new(&["j", "re", "im"]);
    for (j, z) in points.iter().enumerate() {
        g.push(vec![j.to_string(), f(z.re), f(z.im)]);
    }
    ctx.out.csv("szego_grid.csv", &g)?;

    let worst = |sign: i32| -> Vec<(f64, f64)> {
        chk.modes
            .iter()
            .zip(&chk.deviation)
            .filter(|(m, _)| m.signum() == sign || (sign > 0 && **m == 0))
            .map(|(m, row)| ((m.abs() + 1) as f64, row.iter().cloned().fold(0.0, f64::max)))
            .collect()
    };
    ctx.out.svg(
        "szego.svg",
        &loglog(
            &format!("{} deviation", cfg.weight.label()),
            "|m|+1",
            "max deviation",
            &[Series { name: "m >= 0", points: worst(1) }, Series { name: "m < 0", points: worst(-1) }],
        ),
    )?;

    let summary = format!("max deviation {:e} over modes -{m}..={m}", chk.max_deviation);
    let mut out = Outcome::ok(summary, serde_json::json!({ "tol": tol, "max_deviation": limit, "modes": m }));
    if !(chk.max_deviation <= limit) {
        out.inconsistency = Some(format!(
            "projection deviates from the closed form by {:e} > {limit:e}",
            chk.max_deviation
        ));
    }
    Ok(out)
}
