use bergman::expweights::{
    d_rho, kernel_bound_fit, damped_family_scan, sample_pairs, tail_power_family_scan, wzero_check, ClassESpec,
    FamilyScan, KernelBoundOptions, Rho,
};
use bergman::weights::WeightSpec;
use clap::ValueEnum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::criteria::{emit_split, family_outcome};
use super::{complex, emit_trace, positive, scan_options, Ctx, Outcome, PointPair, ScanTuning};
use crate::error::{CliError, Result};
use crate::output::{f, Table};
use crate::svg::{loglog, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    WzeroCheck,
    Drho,
    KernelBound,
    Thm52,
    Prop22,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::WzeroCheck => "wzero-check",
            Mode::Drho => "drho",
            Mode::KernelBound => "kernel-bound",
            Mode::Thm52 => "thm52",
            Mode::Prop22 => "prop22",
        }
    }

    pub fn uses_depth(self) -> bool {
        !matches!(self, Mode::Drho | Mode::KernelBound)
    }

    pub fn uses_tol(self) -> bool {
        !matches!(self, Mode::WzeroCheck | Mode::Drho)
    }
}

pub fn run(ctx: &mut Ctx, mode: Mode) -> Result<Outcome> {
    match mode {
        Mode::WzeroCheck => wzero(ctx),
        Mode::Drho => drho(ctx),
        Mode::KernelBound => kernel_bound(ctx),
        Mode::Thm52 => thm52(ctx),
        Mode::Prop22 => prop22(ctx),
    }
}

fn check(spec: &ClassESpec) -> Result<()> {
    spec.validate().map_err(CliError::core("spec"))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WzeroConfig {
    spec: ClassESpec,
    depth: Option<u32>,
    max_band: Option<f64>,
}

fn wzero(ctx: &mut Ctx) -> Result<Outcome> {
    let cfg: WzeroConfig = ctx.raw.bind()?;
    check(&cfg.spec)?;
    let depth = cfg.depth.unwrap_or(40);
    let max_band = positive("max_band", cfg.max_band.unwrap_or(4.0))?;
    let rep = wzero_check(&cfg.spec, depth, max_band).map_err(CliError::core("spec"))?;
    ctx.out.report("expcheck wzero-check", &rep)?;
    let mut t = Table::new(&["r", "laplacian", "ratio", "rho_over_delta"]);
    for r in &rep.rows {
        t.push(vec![f(r.r), f(r.laplacian), f(r.ratio), f(r.rho_over_delta)]);
    }
    ctx.out.csv("wzero.csv", &t)?;
    let pts = |g: fn(&bergman::expweights::WzeroRow) -> f64| -> Vec<(f64, f64)> {
        rep.rows.iter().map(|r| (1.0 / (1.0 - r.r), g(r))).collect()
    };
    ctx.out.svg(
        "wzero.svg",
        &loglog(
            "wzero check",
            "1/(1-r)",
            "ratio",
            &[
                Series { name: "laplacian^-1/2 / rho", points: pts(|r| r.ratio) },
                Series { name: "rho / (1-r)", points: pts(|r| r.rho_over_delta) },
            ],
        ),
    )?;
    let summary = format!("band {:.4} ({})", rep.band, if rep.within_band { "within" } else { "outside" });
    Ok(Outcome::ok(summary, serde_json::json!({ "depth": depth, "max_band": max_band })))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DrhoConfig {
    /// `ρ` comes from `spec` unless `rho_exponent` is given.
    spec: Option<ClassESpec>,
    rho_exponent: Option<f64>,
    pairs: Option<Vec<PointPair>>,
    random: Option<RandomPairs>,
    n_theta: Option<usize>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RandomPairs {
    n: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_sources")]
    source_radii: Vec<f64>,
    #[serde(default = "default_target")]
    target_max: f64,
}

fn default_sources() -> Vec<f64> {
    vec![0.0, 0.5, 0.9]
}

fn default_target() -> f64 {
    0.9
}

fn drho(ctx: &mut Ctx) -> Result<Outcome> {
    let cfg: DrhoConfig = ctx.raw.bind()?;
    let rho = match (cfg.rho_exponent, &cfg.spec) {
        (Some(e), _) => Rho {
            exponent: positive("rho_exponent", e)?,
        },
        (None, Some(s)) => {
            check(s)?;
            s.rho()
        }
        (None, None) => return Err(CliError::Usage("field `spec`: need `spec` or `rho_exponent`".into())),
    };
    let n_theta = cfg.n_theta.unwrap_or(256);
    if n_theta < 8 || !n_theta.is_multiple_of(2) {
        return Err(CliError::Usage(format!("field `n_theta`: need an even count >= 8, got {n_theta}")));
    }
    let mut pairs: Vec<(Complex64, Complex64)> =
        cfg.pairs.iter().flatten().map(|p| (complex(p.z), complex(p.zeta))).collect();
    if let Some(r) = &cfg.random {
        if r.source_radii.iter().chain([&r.target_max]).any(|x| !(0.0..1.0).contains(x)) {
            return Err(CliError::Usage("field `random`: radii must lie in [0, 1)".into()));
        }
        pairs.extend(sample_pairs(r.n, &r.source_radii, r.target_max, r.seed));
    }
    if pairs.is_empty() {
        return Err(CliError::Usage("field `pairs`: no pairs given (set `pairs` or `random`)".into()));
    }
    let mut rows = Vec::new();
    for (i, &(z, zeta)) in pairs.iter().enumerate() {
        let d = d_rho(rho, z, zeta, n_theta).map_err(CliError::core(&format!("pairs[{i}]")))?;
        rows.push((z, zeta, d));
    }
    let report: Vec<_> = rows
        .iter()
        .map(|(z, zeta, d)| serde_json::json!({ "z": z, "zeta": zeta, "d_rho": d }))
        .collect();
    ctx.out.report("expcheck drho", &serde_json::json!({ "rho": rho, "rows": report }))?;
    let mut t = Table::new(&[
        "z_re", "z_im", "zeta_re", "zeta_im", "value", "coarse", "richardson", "tolerance", "chord",
    ]);
    for (z, zeta, d) in &rows {
        t.push(vec![
            f(z.re),
            f(z.im),
            f(zeta.re),
            f(zeta.im),
            f(d.value),
            f(d.coarse),
            f(d.richardson),
            f(d.tolerance),
            f(d.chord),
        ]);
    }
    ctx.out.csv("drho.csv", &t)?;
    let worst = rows.iter().map(|(_, _, d)| d.tolerance / d.value.max(1e-300)).fold(0.0, f64::max);
    Ok(Outcome::ok(
        format!("{} distances, worst relative tolerance {worst:.3e}", rows.len()),
        serde_json::json!({ "n_theta": n_theta }),
    ))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundConfig {
    spec: ClassESpec,
    source_radii: Option<Vec<f64>>,
    target_max: Option<f64>,
    pairs: Option<usize>,
    seed: Option<u64>,
    n_theta: Option<usize>,
    powers: Option<Vec<u32>>,
    diagonal: Option<Vec<f64>>,
    tol: Option<f64>,
}

fn kernel_bound(ctx: &mut Ctx) -> Result<Outcome> {
    let cfg: BoundConfig = ctx.raw.bind()?;
    check(&cfg.spec)?;
    let d = KernelBoundOptions::default();
    let opts = KernelBoundOptions {
        source_radii: cfg.source_radii.unwrap_or(d.source_radii),
        target_max: cfg.target_max.unwrap_or(d.target_max),
        pairs: cfg.pairs.unwrap_or(d.pairs),
        seed: cfg.seed.unwrap_or(d.seed),
        n_theta: cfg.n_theta.unwrap_or(d.n_theta),
        powers: cfg.powers.unwrap_or(d.powers),
        diagonal: cfg.diagonal.unwrap_or(d.diagonal),
        tol: positive("tol", cfg.tol.unwrap_or(d.tol))?,
        exec: ctx.exec,
    };
    let fit = kernel_bound_fit(&cfg.spec, &opts).map_err(CliError::core("spec"))?;
    ctx.out.report("expcheck kernel-bound", &fit)?;
    let mut p = Table::new(&["z_re", "z_im", "zeta_re", "zeta_im", "d_rho", "ln_ratio", "ln_separation"]);
    for r in &fit.rows {
        p.push(vec![
            f(r.z.re),
            f(r.z.im),
            f(r.zeta.re),
            f(r.zeta.im),
            f(r.d_rho),
            f(r.ln_ratio),
            f(r.ln_separation),
        ]);
    }
    ctx.out.csv("kernel_bound_pairs.csv", &p)?;
    let mut g = Table::new(&["r", "ratio"]);
    for r in &fit.diagonal {
        g.push(vec![f(r.r), f(r.ratio)]);
    }
    ctx.out.csv("kernel_bound_diagonal.csv", &g)?;
    let diag: Vec<(f64, f64)> = fit.diagonal.iter().map(|r| (1.0 / (1.0 - r.r), r.ratio)).collect();
    ctx.out.svg(
        "kernel_bound_diagonal.svg",
        &loglog("diagonal ratio", "1/(1-r)", "ratio", &[Series { name: "ratio", points: diag }]),
    )?;
    Ok(Outcome::ok(
        format!("alpha {:.4}, R^2 {:.4}, {} pairs ({} dropped)", fit.alpha, fit.r2, fit.rows.len(), fit.dropped),
        serde_json::to_value(&opts).unwrap_or_default(),
    ))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Thm52Config {
    spec: ClassESpec,
    #[serde(default = "unweighted")]
    nu: WeightSpec,
    #[serde(default = "zero")]
    t: Vec<f64>,
    #[serde(default = "zero")]
    sigma: Vec<f64>,
    depth: Option<u32>,
    tol: Option<f64>,
    #[serde(default)]
    scan: ScanTuning,
}

fn unweighted() -> WeightSpec {
    WeightSpec::standard(0.0)
}

fn zero() -> Vec<f64> {
    vec![0.0]
}

fn emit_families(ctx: &mut Ctx, command: &str, scans: &[(String, FamilyScan)]) -> Result<()> {
    let doc: Vec<_> = scans.iter().map(|(k, s)| serde_json::json!({ "key": k, "scan": s })).collect();
    ctx.out.report(command, &doc)?;
    for (k, s) in scans {
        emit_trace(&mut ctx.out, &format!("family_{k}"), &s.report)?;
        emit_split(&mut ctx.out, &format!("family_{k}_split.csv"), s)?;
    }
    Ok(())
}

fn thm52(ctx: &mut Ctx) -> Result<Outcome> {
    let cfg: Thm52Config = ctx.raw.bind()?;
    check(&cfg.spec)?;
    cfg.nu.validate().map_err(CliError::core("nu"))?;
    if cfg.t.is_empty() || cfg.sigma.is_empty() {
        return Err(CliError::Usage("field `t`: `t` and `sigma` need at least one value".into()));
    }
    let opts = scan_options(cfg.depth, cfg.tol, &cfg.scan, ctx.exec)?;
    let mut scans = Vec::new();
    for &t in &cfg.t {
        for &sigma in &cfg.sigma {
            let s = tail_power_family_scan(&cfg.spec, &cfg.nu, t, sigma, &opts).map_err(CliError::core("t"))?;
            scans.push((format!("t{t}_s{sigma}"), s));
        }
    }
    emit_families(ctx, "expcheck thm52", &scans)?;
    Ok(family_outcome(&scans, &opts))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Prop22Config {
    alpha: f64,
    beta: f64,
    #[serde(default)]
    sigma: f64,
    #[serde(default = "zero")]
    gamma: Vec<f64>,
    depth: Option<u32>,
    tol: Option<f64>,
    #[serde(default)]
    scan: ScanTuning,
}

fn prop22(ctx: &mut Ctx) -> Result<Outcome> {
    let cfg: Prop22Config = ctx.raw.bind()?;
    if cfg.gamma.is_empty() {
        return Err(CliError::Usage("field `gamma`: empty list".into()));
    }
    let opts = scan_options(cfg.depth, cfg.tol, &cfg.scan, ctx.exec)?;
    let mut scans = Vec::new();
    for &g in &cfg.gamma {
        let s = damped_family_scan(cfg.alpha, cfg.beta, cfg.sigma, g, &opts).map_err(CliError::core("alpha"))?;
        scans.push((format!("g{g}"), s));
    }
    emit_families(ctx, "expcheck prop22", &scans)?;
    Ok(family_outcome(&scans, &opts))
}
