//! `mrfuq`: bounds on quantities of interest under model perturbations,
//! the diagnostics example curves and the Ising band experiments.
//!
//! Every subcommand writes its files and a `manifest.json` into `--out`.
//! Exit codes: 0 success, 2 input or parse error, 3 enumeration capacity,
//! 4 precondition or unsupported perturbation, 5 internal error.

mod bound;
mod grid;
mod ising;
mod medical;
mod output;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mrfuq::model::DEFAULT_ENUMERATION_CAP;
use mrfuq::Error;

const CAP_ENV: &str = "MRFUQ_ENUM_CAP";

#[derive(Parser, Debug)]
#[command(name = "mrfuq", version, about = "Uncertainty bounds for discrete Markov random fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bounds on a quantity of interest for an alternative model or KL radius.
    Bound(bound::BoundArgs),
    /// Diagnostics example bound curves.
    Medical(medical::MedicalArgs),
    /// Ising experiments.
    #[command(subcommand)]
    Ising(ising::IsingCommand),
}

/// Malformed user input detected in the CLI layer.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_error(e: anyhow::Error) -> anyhow::Error {
    InputError(format!("{e:#}")).into()
}

fn enumeration_cap() -> Result<u64, InputError> {
    match std::env::var(CAP_ENV) {
        Err(_) => Ok(DEFAULT_ENUMERATION_CAP),
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| InputError(format!("{CAP_ENV} must be a positive integer, got `{v}`"))),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::Input(_) | Error::Parse { .. } | Error::Range(_) | Error::Domain(_) => 2,
                Error::Capacity { .. } => 3,
                Error::Precondition(_) | Error::Unsupported(_) => 4,
            };
        }
        if cause.is::<InputError>() {
            return 2;
        }
        if let Some(io) = cause.downcast_ref::<std::io::Error>() {
            if io.kind() == std::io::ErrorKind::NotFound {
                return 2;
            }
        }
    }
    5
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = enumeration_cap().map_err(anyhow::Error::from).and_then(|cap| match &cli.command {
        Command::Bound(a) => bound::run(a, cap),
        Command::Medical(a) => medical::run(a, cap),
        Command::Ising(c) => ising::run(c, cap),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
