//! Configuration, persistence and subcommands of the `cnqg` binary.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod suite;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use cnqg_core::Scheme;

pub use config::{parse_config, parse_config_str, Overrides, RunManifest, Shape};
pub use error::{CliError, CliResult, Exit};

/// Environment variable capping the worker threads of the numerical core.
pub const THREADS_ENV: &str = "CNQG_THREADS";

#[derive(Debug, Parser)]
#[command(name = "cnqg", version, about = "Periodic-box simulator and verification harness for the compressible nonlocal QG model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a manifest and write diagnostics and checkpoints.
    Run(ManifestArgs),
    /// Run the randomized invariant suite.
    PropertySuite(SuiteArgs),
    /// Compare spectral operators with the singular-integral quadratures.
    OracleCompare(ManifestArgs),
    /// Inviscid run from nonpositive data with the second-moment probe.
    BlowupProbe(ManifestArgs),
    /// Fit algebraic decay rates to a finished run.
    DecayFit(DecayArgs),
}

#[derive(Debug, Args)]
pub struct ManifestArgs {
    /// `key = value` manifest file.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// `if-euler` or `etdrk2`.
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Option<Scheme>,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Run a single named check.
    #[arg(long)]
    pub only: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    /// Directory of a finished `run` (holds `manifest.txt` and `series.csv`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fit window `t_a,t_b`; defaults to the whole series.
    #[arg(long)]
    pub window: Option<String>,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: cnqg_core::Error| e.to_string())
}

impl ManifestArgs {
    fn manifest(&self) -> CliResult<RunManifest> {
        let overrides = Overrides {
            seed: self.seed,
            out: self.out.clone(),
            nu: self.nu,
            alpha: self.alpha,
            eps: self.eps,
            scheme: self.scheme,
        };
        parse_config(&self.config, &overrides)
    }
}

/// Sizes the global thread pool from [`THREADS_ENV`] when it is set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(THREADS_ENV, format!("expected a positive integer, found `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(THREADS_ENV, e.to_string()))
}

pub fn execute(cli: &Cli) -> CliResult<Exit> {
    configure_threads()?;
    match &cli.command {
        Command::Run(a) => commands::run(&a.manifest()?),
        Command::PropertySuite(a) => commands::property_suite(a.trials, a.seed, a.only.as_deref()),
        Command::OracleCompare(a) => commands::oracle_compare(&a.manifest()?),
        Command::BlowupProbe(a) => commands::blowup_probe(&a.manifest()?),
        Command::DecayFit(a) => {
            let window = a.window.as_deref().map(commands::parse_window).transpose()?;
            commands::decay_fit_dir(&commands::run_dir(a.out.clone()), window)
        }
    }
}
