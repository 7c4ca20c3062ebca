//! Command-line driver for the `isoflat` pipeline.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on
//! input or configuration errors.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use isoflat::io;

pub mod commands;
pub mod config;

pub use commands::Outcome;
pub use config::{parse_grid, Overrides, RunConfig, Source};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: isoflat::Error },
    #[error(transparent)]
    Core(#[from] isoflat::Error),
}

#[derive(Debug, Parser)]
#[command(name = "isoflat", version, about = "Isothermic surfaces through curved flats")]
struct Cli {
    #[command(subcommand)]
    command: CommandName,
}

#[derive(Debug, Subcommand)]
enum CommandName {
    /// Residual suite for a patch (Gauss-Codazzi, flatness) or a Calapso potential.
    Check(CommonArgs),
    /// Builds, integrates and extracts the triple for each lambda.
    Build(CommonArgs),
    /// Sym surfaces, dual surface and fundamental-form checks; OBJ export.
    Surfaces(CommonArgs),
    /// Surface from a solution of the Calapso equation.
    Calapso(CommonArgs),
}

#[derive(Debug, clap::Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory [default: from config, else ./isoflat-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Multiplies every tolerance.
    #[arg(long)]
    tol_scale: Option<f64>,
    /// Comma-separated spectral parameters.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambda: Option<Vec<f64>>,
    /// nx,ny,hx,hy[,x0,y0]
    #[arg(long, value_parser = parse_grid)]
    grid: Option<isoflat::Grid>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides { grid: self.grid, lambda: self.lambda.clone(), tol_scale: self.tol_scale, out: self.out.clone() }
    }
}

/// Runs one command on a resolved configuration, writing `report.json` and
/// `timing.json` next to the command's outputs.
pub fn execute(name: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("isoflat-out"));
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::Config(format!("out: cannot create {}: {e}", out.display())))?;
    let start = Instant::now();
    let mut outcome = match name {
        "check" => commands::cmd_check(cfg, &out),
        "build" => commands::cmd_build(cfg, &out),
        "surfaces" => commands::cmd_surfaces(cfg, &out),
        "calapso" => commands::cmd_calapso(cfg, &out),
        other => Err(CliError::Config(format!("unknown command `{other}`"))),
    }?;
    let runtime = start.elapsed().as_secs_f64();
    let report_path = out.join("report.json");
    io::write_json(&report_path, &outcome.report)?;
    let timing_path = out.join("timing.json");
    io::write_json(&timing_path, &serde_json::json!({ "command": name, "runtime_seconds": runtime }))?;
    outcome.files.push(report_path);
    outcome.files.push(timing_path);
    Ok(outcome)
}

fn summarize(outcome: &Outcome) {
    for c in &outcome.report.checks {
        println!("{} {:<40} {:>12.3e} (tol {:.1e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance);
    }
    for f in &outcome.files {
        log::info!("wrote {}", f.display());
    }
}

/// Parses arguments, runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let (name, common) = match &cli.command {
        CommandName::Check(a) => ("check", a),
        CommandName::Build(a) => ("build", a),
        CommandName::Surfaces(a) => ("surfaces", a),
        CommandName::Calapso(a) => ("calapso", a),
    };
    let result = RunConfig::load(&common.config).and_then(|mut cfg| {
        cfg.apply(common.overrides());
        execute(name, &cfg)
    });
    match result {
        Ok(outcome) => {
            summarize(&outcome);
            if outcome.report.passed {
                EXIT_PASS
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT_ERROR
        }
    }
}
