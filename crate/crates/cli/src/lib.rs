//! `ecoepi` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 solver divergence, 3 a
//! reproduction or verification item failed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod reproduce;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ecoepi_core::State;

use crate::config::{parse_number, parse_state, ConfigFile, Overrides, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "ecoepi",
    version,
    about = "Fractional-order predator-prey model with infected prey"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the model and write one CSV per (alpha, initial state).
    Simulate(RunArgs),
    /// Thresholds, equilibria and a per-order stability table.
    Report(ReportArgs),
    /// Equilibria with existence conditions and residuals.
    Equilibria(ModelArgs),
    /// Stability classification over a parameter grid.
    Sweep(SweepArgs),
    /// Recompute a published example or figure and compare.
    Reproduce(ReproduceArgs),
    /// Positivity, boundedness, Lyapunov, convergence and Lipschitz checks on a run.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Built-in parameter set.
    #[arg(long)]
    pub preset: Option<String>,
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output format for tables written to stdout.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated fractional orders, fractions allowed (`2/3`).
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    pub alpha: Option<Vec<f64>>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Initial state `S,I,P`; repeat for several.
    #[arg(long, value_parser = parse_state)]
    pub initial: Option<Vec<State>>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Orders for the stability table (default 0.6, 2/3, 0.85, 0.95, 1).
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    pub alpha: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Parameter to vary: r, K, lambda, m, mu, a, theta or d.
    #[arg(long)]
    pub vary: String,
    /// `start:stop:count` (inclusive, evenly spaced) or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    pub alpha: Option<Vec<f64>>,
    /// Directory for `sweep_<name>.csv`; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    /// ex1, ex1-unstable, ex2, ex3, fig1 .. fig5
    pub id: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Absolute tolerance for every numeric item, replacing the printed-precision default.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Max-norm tolerance for convergence over the last 10% of nodes.
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
    /// Verify an existing trajectory CSV instead of integrating (needs one alpha).
    #[arg(long)]
    pub input: Option<PathBuf>,
}

impl ModelArgs {
    fn file(&self) -> CliResult<Option<ConfigFile>> {
        self.config.as_deref().map(ConfigFile::load).transpose()
    }

    pub fn resolve(&self) -> CliResult<RunConfig> {
        RunConfig::resolve(
            self.file()?,
            Overrides {
                preset: self.preset.clone(),
                ..Overrides::default()
            },
        )
    }
}

impl RunArgs {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        RunConfig::resolve(
            self.model.file()?,
            Overrides {
                preset: self.model.preset.clone(),
                alpha: self.alpha.clone(),
                step: self.step,
                t_end: self.t_end,
                initial_states: self.initial.clone(),
                out: self.out.clone(),
            },
        )
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Simulate(args) => {
            if args.model.format == Some(Format::Table) {
                return Err(CliError::Validation("simulate writes csv only".into()));
            }
            commands::simulate(&args.resolve()?, stdout)
        }
        Command::Report(args) => {
            let run = args.model.resolve()?;
            let alphas = match &args.alpha {
                Some(a) => a.clone(),
                None => commands::REPORT_ALPHAS.to_vec(),
            };
            commands::report(
                &run,
                &alphas,
                args.model.format.unwrap_or(Format::Table),
                stdout,
            )
        }
        Command::Equilibria(args) => {
            let run = args.resolve()?;
            commands::equilibria_table(&run, args.format.unwrap_or(Format::Table), stdout)
        }
        Command::Sweep(args) => {
            let run = args.model.resolve()?;
            let alphas = args
                .alpha
                .clone()
                .unwrap_or_else(|| config::DEFAULT_ALPHAS.to_vec());
            let grid = commands::parse_grid(&args.grid)?;
            commands::sweep(
                &run.params,
                &args.vary,
                &grid,
                &alphas,
                args.out.as_deref(),
                stdout,
            )
        }
        Command::Reproduce(args) => {
            let out = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            reproduce::reproduce(&args.id, &out, args.tolerance, stdout)
        }
        Command::Verify(args) => commands::verify(
            &args.run.resolve()?,
            args.tolerance,
            args.input.as_deref(),
            stdout,
        ),
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
