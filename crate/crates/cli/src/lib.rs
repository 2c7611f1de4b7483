//! Command implementations behind the `coefficiency` binary.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coefficiency_core::config::ExperimentConfig;

mod analyze;
mod oracle;
mod run;
mod sweep;

pub use analyze::analyze;
pub use oracle::oracle;
pub use run::run;
pub use sweep::sweep;

/// Configuration used when `--config` is not given.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

#[derive(Debug, Parser)]
#[command(name = "coefficiency", version, about = "Adaptive human-robot handover experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one learning experiment and write its log directory.
    Run(RunArgs),
    /// Run seeds x profiles concurrently and aggregate the outcomes.
    Sweep(SweepArgs),
    /// Print ground-truth arm means and planned trajectory energies.
    Oracle(OracleArgs),
    /// Export plot-ready CSVs from a run or sweep directory.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML configuration; the bundled default when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Profile preset, overriding the configured one.
    #[arg(long)]
    pub profile: Option<String>,
    /// Run directory; defaults to `<output_dir>/<profile>-seed<seed>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Number of seeds, run as `0..N`.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Profiles to sweep (repeatable or comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub profile: Vec<String>,
    /// Sweep directory; defaults to `<output_dir>/sweep`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub profile: Option<String>,
    /// Also write the table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Run directory, or a sweep directory containing run directories.
    pub dir: PathBuf,
    /// Output directory; defaults to `<dir>/analysis`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure classified by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input (exit 2).
    Validation(anyhow::Error),
    /// Failure while running (exit 1).
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(e) => write!(f, "invalid input: {e:#}"),
            CliError::Runtime(e) => write!(f, "run failed: {e:#}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn invalid(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Validation(e.into())
}

pub(crate) fn failed(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Runtime(e.into())
}

pub fn load_config(args: &ConfigArgs) -> CliResult<ExperimentConfig> {
    match &args.config {
        Some(path) => ExperimentConfig::load(path)
            .map_err(|e| invalid(anyhow::Error::new(e).context(format!("loading {}", path.display())))),
        None => ExperimentConfig::from_toml_str(DEFAULT_CONFIG).map_err(invalid),
    }
}

pub(crate) fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path)
        .map_err(|e| failed(anyhow::Error::new(e).context(format!("creating {}", path.display()))))
}

pub fn execute(cli: Cli) -> ExitCode {
    let result = match cli.command {
        Command::Run(a) => run(&a),
        Command::Sweep(a) => sweep(&a),
        Command::Oracle(a) => oracle(&a),
        Command::Analyze(a) => analyze(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
