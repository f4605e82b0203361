//! Batch front end for `specdamp-core`: reads a JSON run configuration,
//! dispatches the requested analyses and writes reports and plots.

pub mod config;
pub mod output;
pub mod plot;
pub mod report;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;
pub use report::Report;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONDITION_FAILED: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// Name of the environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "SPECDAMP_SEED";

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<specdamp_core::Error> for CliError {
    fn from(e: specdamp_core::Error) -> Self {
        if e.is_numerical() {
            Self::numerical(format!("numerical failure: {e}"))
        } else {
            Self::invalid(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "specdamp", version, about = "Spectral analysis of damped second-order systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the requested analyses and write report.json, eigenvalues.csv and spectrum.svg.
    Analyze(CommonArgs),
    /// Evolve an initial state and write energy.csv and energy.svg.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Overrides `simulate.t_max`.
        #[arg(long)]
        t_max: Option<f64>,
        /// Overrides `simulate.samples`.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Print the condition table; exit 0 iff every evaluated condition holds.
    Check(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the overdamping optimizer restarts.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// `--seed`, then `SPECDAMP_SEED`, then the config.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>, config: u64) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::invalid(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        None => Ok(config),
    }
}

fn load(args: &CommonArgs) -> Result<(RunConfig, u64), CliError> {
    let cfg = RunConfig::load(&args.config)?;
    let env = std::env::var(SEED_ENV).ok();
    let seed = resolve_seed(args.seed, env.as_deref(), cfg.seed)?;
    Ok((cfg, seed))
}

fn out_dir(args: &CommonArgs) -> &Path {
    args.out.as_deref().unwrap_or(Path::new("specdamp-report"))
}

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Analyze(args) => run_analyze(&args),
        Command::Simulate { common, t_max, samples } => run_simulate(&common, t_max, samples),
        Command::Check(args) => run_check(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("specdamp: {e}");
            e.code
        }
    }
}

pub fn run_analyze(args: &CommonArgs) -> Result<u8, CliError> {
    let (cfg, seed) = load(args)?;
    let bundle = report::analyze(&cfg, seed)?;
    let dir = out_dir(args);
    output::write_json(dir, "report.json", &bundle.report)?;
    output::write_atomic(dir, "eigenvalues.csv", &report::eigenvalue_csv(&bundle)?)?;
    output::write_atomic(dir, "spectrum.svg", plot::spectrum_svg(&bundle).as_bytes())?;
    Ok(EXIT_OK)
}

pub fn run_simulate(args: &CommonArgs, t_max: Option<f64>, samples: Option<usize>) -> Result<u8, CliError> {
    let (cfg, _) = load(args)?;
    let sim = report::simulate(&cfg, t_max, samples)?;
    let dir = out_dir(args);
    output::write_atomic(dir, "energy.csv", &report::energy_csv(&sim)?)?;
    output::write_atomic(dir, "energy.svg", plot::energy_svg(&sim).as_bytes())?;
    Ok(EXIT_OK)
}

pub fn run_check(args: &CommonArgs) -> Result<u8, CliError> {
    let (cfg, seed) = load(args)?;
    let section = report::check(&cfg, seed)?;
    print!("{}", report::verdict_table(&section.verdicts));
    if let Some(dir) = &args.out {
        output::write_json(dir, "conditions.json", &section)?;
    }
    Ok(if section.all_hold { EXIT_OK } else { EXIT_CONDITION_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(3), Some("5"), 7), Ok(3));
        assert_eq!(resolve_seed(None, Some("5"), 7), Ok(5));
        assert_eq!(resolve_seed(None, None, 7), Ok(7));
        assert_eq!(resolve_seed(None, Some("x"), 7).unwrap_err().code, EXIT_INVALID);
    }

    #[test]
    fn core_errors_map_to_exit_codes() {
        let e: CliError = specdamp_core::Error::MissingEssentialSpectrumProxy.into();
        assert_eq!(e.code, EXIT_INVALID);
        let e: CliError = specdamp_core::Error::OptimizerDisagreement {
            margin: 1.0,
            line_search_min: -1.0,
        }
        .into();
        assert_eq!(e.code, EXIT_NUMERICAL);
    }
}
