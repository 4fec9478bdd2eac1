//! `bergman`: numerical experiments on weighted Bergman spaces of the disk.
//!
//! Every subcommand reads a TOML or JSON config, writes `report.json`, CSV
//! traces, optional SVG plots and `manifest.json` into `--out`, and exits
//! with 0 (ok), 1 (inconsistent evidence), 2 (usage) or 3 (numerical budget
//! exhausted).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use bergman::par::Execution;
use clap::{Args, Parser, Subcommand};

use commands::expcheck::Mode;
use commands::{Ctx, Outcome};
use config::RawConfig;
use error::{CliError, Result};
use output::{Manifest, OutputDir};

#[derive(Debug, Parser)]
#[command(name = "bergman", version, about = "Weighted Bergman space experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config (TOML, or JSON by `.json` extension).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "bergman-out")]
    out: PathBuf,
    /// Scan depth; overrides `depth` in the config.
    #[arg(long, global = true, value_name = "N")]
    depth: Option<u32>,
    /// Tolerance; overrides `tol` in the config.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    plot: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Doubling-class verdicts for one weight.
    Classify,
    /// Criterion scans for a pair of weights.
    Criteria,
    /// H∞ and Bloch kernel-norm scans.
    Norm,
    /// Pointwise kernel values with error estimates.
    Kernel,
    /// Projection of harmonic polynomials against the closed form.
    Szego,
    /// Checks on exponential-type weights.
    Expcheck {
        #[arg(value_enum)]
        mode: Mode,
    },
    /// Equivalence matrix over weight pairs.
    Matrix,
}

impl Command {
    fn name(self) -> String {
        match self {
            Command::Classify => "classify".into(),
            Command::Criteria => "criteria".into(),
            Command::Norm => "norm".into(),
            Command::Kernel => "kernel".into(),
            Command::Szego => "szego".into(),
            Command::Expcheck { mode } => format!("expcheck {}", mode.name()),
            Command::Matrix => "matrix".into(),
        }
    }

    /// Whether `--depth` and `--tol` mean something here.
    fn flags(self) -> (bool, bool) {
        match self {
            Command::Classify => (true, false),
            Command::Kernel => (false, true),
            Command::Expcheck { mode } => (mode.uses_depth(), mode.uses_tol()),
            _ => (true, true),
        }
    }

    fn needs_config(self) -> bool {
        !matches!(self, Command::Szego | Command::Matrix)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cmd = cli.command;
    let c = &cli.common;
    let mut raw = match &c.config {
        Some(p) => RawConfig::load(p)?,
        None if cmd.needs_config() => {
            return Err(CliError::Usage(format!("`{}` needs --config <PATH>", cmd.name())))
        }
        None => RawConfig::empty(),
    };
    let (depth_ok, tol_ok) = cmd.flags();
    if let Some(d) = c.depth {
        if !depth_ok {
            return Err(CliError::Usage(format!("--depth is not used by `{}`", cmd.name())));
        }
        raw.set("depth", d.into());
    }
    if let Some(t) = c.tol {
        if !tol_ok {
            return Err(CliError::Usage(format!("--tol is not used by `{}`", cmd.name())));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive and finite, got {t}")));
        }
        raw.set("tol", t.into());
    }
    let exec = threads(c.threads)?;
    let out = OutputDir::create(&c.out, c.plot)?;
    let mut ctx = Ctx { raw, out, exec };

    let outcome: Outcome = match cmd {
        Command::Classify => commands::classify::run(&mut ctx),
        Command::Criteria => commands::criteria::run(&mut ctx),
        Command::Norm => commands::criteria::run_norm(&mut ctx),
        Command::Kernel => commands::kernel::run(&mut ctx),
        Command::Szego => commands::szego::run(&mut ctx),
        Command::Expcheck { mode } => commands::expcheck::run(&mut ctx, mode),
        Command::Matrix => commands::matrix::run(&mut ctx),
    }?;

    let status = if outcome.inconsistency.is_some() { "inconsistent" } else { "ok" };
    let Ctx { raw, out, .. } = ctx;
    let dir = out.path().to_path_buf();
    out.finish(Manifest {
        command: &cmd.name(),
        config: &raw,
        tolerances: outcome.tolerances,
        threads: c.threads,
        status,
    })?;
    println!("{}: {}", cmd.name(), outcome.summary);
    println!("artifacts in {}", dir.display());
    match outcome.inconsistency {
        Some(msg) => Err(CliError::Inconsistent(msg)),
        None => Ok(()),
    }
}

fn threads(n: Option<usize>) -> Result<Execution> {
    match n {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Usage(format!("--threads {n}: {e}")))?;
            #[cfg(not(feature = "parallel"))]
            let _ = n;
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}
