//! `aircomp`: constellation design and MSE evaluation for over-the-air sums.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::LevelFilter;

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "aircomp", version, about = "Constellation design for over-the-air computation of sums")]
struct Cli {
    /// JSON config file; command-line flags take precedence over its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Only log errors
    #[arg(long, global = true, conflicts_with = "verbose")]
    quiet: bool,
    /// Log more (repeat for debug output)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the MSE-optimal spacings (d1, d2)
    Optimize(RunConfig),
    /// Evaluate designs over an SNR range and write one row per cell
    Sweep(RunConfig),
    /// Positive roots of the threshold polynomials and the SNR threshold
    Roots(RunConfig),
    /// Analytic MSE at given spacings, optionally with a Monte Carlo check
    Evaluate(RunConfig),
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config; exit status 2.
    Usage(String),
    /// Solver or I/O failure; exit status 1.
    Runtime(anyhow::Error),
}

impl From<aircomp_core::Error> for CliError {
    fn from(e: aircomp_core::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

fn init_logging(cli: &Cli) {
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => LevelFilter::Error,
        (false, 0) => LevelFilter::Warn,
        (false, 1) => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).parse_default_env().init();
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Optimize(flags) => commands::optimize(&flags.overlay(file)),
        Command::Sweep(flags) => commands::sweep(&flags.overlay(file)),
        Command::Roots(flags) => commands::roots(&flags.overlay(file)),
        Command::Evaluate(flags) => commands::evaluate(&flags.overlay(file)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(&cli);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
