//! `levylab`: draw samples, run verification suites, summarize reports.
//!
//! Exit codes: 0 pass, 1 statistical failure, 2 configuration or domain error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use levylab::suites::Suite;
use thiserror::Error;

use config::{Command, ExperimentConfig, Format, Model};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Domain(#[from] levylab::Error),
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
}

#[derive(Parser, Debug)]
#[command(name = "levylab", version, about = "Lévy random measure samplers and verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Write draws as JSON lines plus a manifest.
    Sample(Flags),
    /// Run a named suite; exit 0 iff it passes.
    Verify(Flags),
    /// Aggregate report JSON files into summary tables.
    Report {
        #[command(flatten)]
        flags: Flags,
        /// Report JSON files.
        inputs: Vec<PathBuf>,
    },
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON config; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    suite: Option<Suite>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Sequence length for cpd, pd and pd2 samples.
    #[arg(long)]
    n_terms: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trunc_atoms: Option<usize>,
    #[arg(long)]
    trunc_tail: Option<f64>,
    /// Comma-separated α values.
    #[arg(long, value_delimiter = ',')]
    alpha_grid: Option<Vec<f64>>,
    /// Comma-separated z values.
    #[arg(long, value_delimiter = ',')]
    z_grid: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format printed to stdout.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Flags {
    fn resolve(&self, command: Command, inputs: Vec<PathBuf>) -> Result<ExperimentConfig, CliError> {
        let file = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(c) = file.command {
            if c != command {
                return Err(CliError::Config(format!("config is for '{c:?}', not '{command:?}'")));
            }
        }
        let flags = ExperimentConfig {
            command: Some(command),
            suite: self.suite,
            model: self.model,
            theta: self.theta,
            alpha: self.alpha,
            c: self.c,
            k: self.k,
            lambda: self.lambda,
            n: self.n,
            n_terms: self.n_terms,
            seed: self.seed,
            trunc_atoms: self.trunc_atoms,
            trunc_tail: self.trunc_tail,
            alpha_grid: self.alpha_grid.clone(),
            z_grid: self.z_grid.clone(),
            panel: None,
            out: self.out.clone(),
            format: self.format,
            inputs,
        };
        Ok(file.overlay(&flags))
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("LEVYLAB_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("LEVYLAB_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    match cli.command {
        Cmd::Sample(f) => commands::sample(&f.resolve(Command::Sample, Vec::new())?).map(|_| true),
        Cmd::Verify(f) => commands::verify(&f.resolve(Command::Verify, Vec::new())?),
        Cmd::Report { flags, inputs } => commands::report(&flags.resolve(Command::Report, inputs)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("levylab: {e}");
            ExitCode::from(2)
        }
    }
}
