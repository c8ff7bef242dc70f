//! `dcoset`: sampling, exact moments, approximation bounds and oracle checks
//! for statistics of random permutations in parabolic double cosets.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "dcoset", version, about = "Random permutations in parabolic double cosets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Common {
    /// Row margins, e.g. `3,2`.
    #[arg(long, global = true)]
    pub lambda: Option<String>,
    /// Column margins.
    #[arg(long, global = true)]
    pub mu: Option<String>,
    /// Inline JSON table such as `[[1,1],[1,0]]`, or a CSV file path.
    #[arg(long, global = true)]
    pub table: Option<String>,
    /// `fp`, `des`, `des_d:<d>` or `inv`.
    #[arg(long, global = true, default_value = "fp")]
    pub stat: String,
    #[arg(long, global = true, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, global = true, env = "DCOSET_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest `n` for which cosets are enumerated.
    #[arg(long, global = true, default_value_t = dcoset::sampler::DEFAULT_ENUMERATION_CAP)]
    pub cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Command {
    /// Draw uniform coset elements; histogram of `--stat`, or the permutations with `--perms`.
    Sample {
        #[arg(long)]
        perms: bool,
    },
    /// List coset elements, or every table with the margins with `--tables`.
    Enumerate {
        #[arg(long)]
        tables: bool,
    },
    /// Statistics of one permutation, or the exact law of `--stat` over the coset.
    Stats {
        /// One-line notation, e.g. `3,1,2`.
        #[arg(long)]
        perm: Option<String>,
    },
    /// Exact mean and variance of `--stat`.
    Moments,
    /// Poisson TV bound for `fp`, Kolmogorov bound for the other statistics.
    Bounds,
    /// Distance of `--stat` to its Poisson or normal approximation.
    Distance,
    /// Oracle checks over all tables with `n <= --nmax`, or the size-bias coupling check.
    Verify {
        #[arg(value_enum)]
        target: Option<VerifyTarget>,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 6)]
        nmax: usize,
    },
    /// Empirical and exact tails of the standardized `--stat` against the tail bounds.
    Concentration {
        #[arg(long, default_value = "0.5,1,2,3")]
        grid: String,
        /// Pilot draws for the variance when neither a formula nor enumeration applies.
        #[arg(long, default_value_t = 100_000)]
        pilot: u64,
    },
    /// Moments, bounds and distances for one table.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyTarget {
    SizeBias,
}

/// A configuration field that failed validation.
#[derive(Debug)]
pub struct InvalidConfig {
    pub field: &'static str,
    pub message: String,
}

impl InvalidConfig {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        InvalidConfig { field, message: message.into() }
    }
}

impl std::fmt::Display for InvalidConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid --{}: {}", self.field, self.message)
    }
}

impl std::error::Error for InvalidConfig {}

pub const MAX_CAP: usize = 12;

fn validate(c: &Common) -> Result<(), InvalidConfig> {
    if c.samples == 0 {
        return Err(InvalidConfig::new("samples", "must be at least 1"));
    }
    if c.threads == Some(0) {
        return Err(InvalidConfig::new("threads", "must be at least 1"));
    }
    if c.cap > MAX_CAP {
        return Err(InvalidConfig::new("cap", format!("must be at most {MAX_CAP}, got {}", c.cap)));
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Report<'a> {
    command: &'a Command,
    config: &'a Common,
    version: &'static str,
    wall_time_seconds: f64,
    result: serde_json::Value,
}

pub enum Output {
    Json(serde_json::Value),
    /// CSV text, with the JSON form kept for `--format json`.
    Both {
        json: serde_json::Value,
        csv: String,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<InvalidConfig>().is_some() {
        return 2;
    }
    match err.downcast_ref::<dcoset::Error>() {
        Some(dcoset::Error::HypothesisViolated { .. }) => 3,
        Some(dcoset::Error::Io(_)) => 1,
        Some(_) => 2,
        None => 1,
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    validate(&cli.config)?;
    let start = Instant::now();
    let (output, ok) = commands::dispatch(&cli.command, &cli.config)?;
    let text = match (cli.config.format, output) {
        (Format::Csv, Output::Both { csv, .. }) => csv,
        (Format::Csv, Output::Json(_)) => {
            return Err(InvalidConfig::new("format", "this command has no CSV form; use --format json").into())
        }
        (Format::Json, Output::Json(result) | Output::Both { json: result, .. }) => {
            let report = Report {
                command: &cli.command,
                config: &cli.config,
                version: env!("CARGO_PKG_VERSION"),
                wall_time_seconds: start.elapsed().as_secs_f64(),
                result,
            };
            serde_json::to_string_pretty(&report)? + "\n"
        }
    };
    match &cli.config.out {
        Some(path) => std::fs::write(path, text).map_err(|e| dcoset::Error::Io(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
