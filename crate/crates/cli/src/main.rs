//! `icw` — reproducible experiments on the rank-1 inhomogeneous Curie-Weiss
//! model and the annealed Ising model on generalized random graphs.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    /// Construction-time problems: bad ranges, missing flags, impossible
    /// combinations.
    fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    /// Failures inside a numerical routine, reported with the failing
    /// tolerance where the routine provides one.
    fn numerical(e: icw::Error) -> Self {
        match e {
            icw::Error::InvalidParameter(_)
            | icw::Error::IndexOutOfRange { .. }
            | icw::Error::DivergentMoment { .. }
            | icw::Error::EnumerationTooLarge { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "icw",
    version,
    about = "Critical behavior of the rank-1 inhomogeneous Curie-Weiss model and the annealed Ising model on generalized random graphs",
    after_help = "Weights: --homogeneous (w = 1), or --tau [--cw] with --n for the deterministic \
power-law sequence, or --tau without --n for its limiting law (mean-field commands only).\n\
Temperature: --beta, --beta-offset (relative to the critical value of the resolved weights), \
or --theta (the effective coupling directly)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical inverse temperature of the resolved weights.
    CriticalPoint(commands::CriticalPointArgs),
    /// Magnetization/susceptibility sweep over beta or B.
    MagnetizationCurve(commands::CurveArgs),
    /// Generate a critical curve and fit one of the exponents.
    ExponentFit(commands::ExponentFitArgs),
    /// Table of the limiting critical density exp(-f(x)).
    CltDensity(commands::DensityArgs),
    /// Finite-N exponent and MGF against their scaling limits.
    CltCheck(commands::CltCheckArgs),
    /// Exact samples of the total spin (one integer per line).
    Sample(commands::SampleArgs),
    /// Exact 2^n law of the total spin.
    Enumerate(commands::EnumerateArgs),
    /// Partition-function sweep along the critical sequence.
    Partition(commands::PartitionArgs),
    /// Scaling-window density table for a given offset coefficient b.
    Window(commands::DensityArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::CriticalPoint(args) => commands::critical_point(args),
        Command::MagnetizationCurve(args) => commands::magnetization_curve(args),
        Command::ExponentFit(args) => commands::exponent_fit(args),
        Command::CltDensity(args) => commands::clt_density(args, "clt-density"),
        Command::CltCheck(args) => commands::clt_check(args),
        Command::Sample(args) => commands::sample(args),
        Command::Enumerate(args) => commands::enumerate(args),
        Command::Partition(args) => commands::partition(args),
        Command::Window(args) => commands::window(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
