pub mod classify;
pub mod criteria;
pub mod expcheck;
pub mod kernel;
pub mod matrix;
pub mod szego;

use bergman::criteria::{CriterionReport, GridKind, ScanOptions};
use bergman::par::Execution;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RawConfig;
use crate::error::{CliError, Result};
use crate::output::{f, OutputDir, Table};
use crate::svg::{loglog, Series};

pub struct Ctx {
    pub raw: RawConfig,
    pub out: OutputDir,
    pub exec: Execution,
}

/// What a command reports back for the manifest and the exit status.
pub struct Outcome {
    pub summary: String,
    pub tolerances: Value,
    /// Set when the evidence contradicts itself (exit code 1).
    pub inconsistency: Option<String>,
}

impl Outcome {
    pub fn ok(summary: impl Into<String>, tolerances: Value) -> Self {
        Self {
            summary: summary.into(),
            tolerances,
            inconsistency: None,
        }
    }
}

/// `[re, im]` in configs.
pub type Point = [f64; 2];

pub fn complex(p: Point) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PointPair {
    pub z: Point,
    pub zeta: Point,
}

/// Fine-tuning of scans, under `[scan]`. The top-level `depth` sets every
/// level count at once and these keys override it.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanTuning {
    pub x_levels: Option<u32>,
    pub radius_depth: Option<u32>,
    pub norm_depth: Option<u32>,
    pub table_step: Option<f64>,
}

pub fn scan_options(depth: Option<u32>, tol: Option<f64>, tuning: &ScanTuning, exec: Execution) -> Result<ScanOptions> {
    let mut o = ScanOptions {
        exec,
        ..ScanOptions::default()
    };
    if let Some(d) = depth {
        (o.x_levels, o.radius_depth, o.norm_depth) = (d, d, d);
    }
    o.x_levels = tuning.x_levels.unwrap_or(o.x_levels);
    o.radius_depth = tuning.radius_depth.unwrap_or(o.radius_depth);
    o.norm_depth = tuning.norm_depth.unwrap_or(o.norm_depth);
    if let Some(t) = tol {
        o.tol = positive("tol", t)?;
    }
    if let Some(s) = tuning.table_step {
        o.table_step = positive("scan.table_step", s)?;
    }
    Ok(o)
}

pub fn positive(field: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Usage(format!("field `{field}`: must be positive and finite, got {x}")))
    }
}

pub fn scan_tolerances(o: &ScanOptions) -> Value {
    serde_json::json!({
        "tol": o.tol,
        "x_levels": o.x_levels,
        "radius_depth": o.radius_depth,
        "norm_depth": o.norm_depth,
        "table_step": o.table_step,
        "rules": o.rules,
    })
}

/// snake_case name of a serializable unit enum.
pub fn tag<T: Serialize>(t: &T) -> String {
    match serde_json::to_value(t) {
        Ok(Value::String(s)) => s,
        Ok(v) => v.to_string(),
        Err(_) => String::new(),
    }
}

pub fn trace_table(r: &CriterionReport) -> Table {
    let mut t = Table::new(&["level", "point", "trace", "running_sup"]);
    for i in 0..r.trace.len() {
        t.push(vec![f(r.levels[i]), f(r.points[i]), f(r.trace[i]), f(r.running_sup[i])]);
    }
    t
}

/// Horizontal coordinate of a trace on a log axis: `x` itself, or `1/(1-r)`.
pub fn plot_abscissa(grid: GridKind, point: f64) -> f64 {
    match grid {
        GridKind::DyadicExponent => point,
        GridKind::DyadicRadius => 1.0 / (1.0 - point),
    }
}

pub fn trace_plot(title: &str, r: &CriterionReport) -> String {
    let xs: Vec<f64> = r.points.iter().map(|&p| plot_abscissa(r.grid, p)).collect();
    let xlabel = match r.grid {
        GridKind::DyadicExponent => "x",
        GridKind::DyadicRadius => "1/(1-r)",
    };
    loglog(
        title,
        xlabel,
        "trace",
        &[
            Series {
                name: "trace",
                points: xs.iter().copied().zip(r.trace.iter().copied()).collect(),
            },
            Series {
                name: "running sup",
                points: xs.iter().copied().zip(r.running_sup.iter().copied()).collect(),
            },
        ],
    )
}

/// Writes `<stem>.csv` and, with `--plot`, `<stem>.svg`.
pub fn emit_trace(out: &mut OutputDir, stem: &str, r: &CriterionReport) -> Result<()> {
    out.csv(&format!("{stem}.csv"), &trace_table(r))?;
    out.svg(&format!("{stem}.svg"), &trace_plot(stem, r))
}
