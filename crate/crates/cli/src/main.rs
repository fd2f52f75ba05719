//! `ptwell`: sweeps, pseudometric constructions, oracle comparisons, metric
//! checks and the verification suite for the discrete two-center PT well.
//!
//! Exit codes: 0 on success, 1 when a check or computation fails, 2 for
//! invalid arguments.

mod commands;
mod coupling;
mod fixtures;
mod output;
mod verify;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ptwell_core::Error as CoreError;

#[derive(Debug, Parser)]
#[command(
    name = "ptwell",
    version,
    about = "Discrete two-center PT-symmetric square well"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues of H(λ) at one coupling or over a uniform λ grid.
    Spectrum(commands::SpectrumArgs),
    /// One closed-form pseudometric P_k(λ).
    Pseudometric(commands::PseudometricArgs),
    /// Brute-force null space of the intertwining equations, compared with the closed forms.
    Oracle(commands::OracleArgs),
    /// Positivity and hermitization report for Θ = Σ μ_k P_k.
    Metric(commands::MetricArgs),
    /// Full invariant suite; exits 1 naming the first failing check.
    Verify(verify::VerifyArgs),
}

/// An argument problem detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn is_usage(err: &anyhow::Error) -> bool {
    if err.downcast_ref::<UsageError>().is_some() {
        return true;
    }
    matches!(
        err.downcast_ref::<CoreError>(),
        Some(
            CoreError::DimensionTooSmall { .. }
                | CoreError::NonFiniteCoupling(_)
                | CoreError::LengthMismatch { .. }
                | CoreError::CouplingPole
                | CoreError::IndexOutOfRange { .. }
                | CoreError::InvalidTolerance(_)
                | CoreError::InvalidRange { .. }
                | CoreError::InvalidSteps(_)
                | CoreError::NotOutsideInterval(_)
        )
    )
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Spectrum(a) => commands::spectrum(&a)?,
        Command::Pseudometric(a) => commands::pseudometric(&a)?,
        Command::Oracle(a) => commands::oracle(&a)?,
        Command::Metric(a) => commands::metric(&a)?,
        Command::Verify(a) => {
            if let Some(fail) = verify::verify(&a)? {
                eprintln!(
                    "ptwell: check '{}' failed at n = {}, λ = {}: {}",
                    fail.check,
                    fail.n.map_or("-".into(), |n| n.to_string()),
                    fail.lambda.as_deref().unwrap_or("-"),
                    fail.detail
                );
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("ptwell: {err:#}");
            ExitCode::from(if is_usage(&err) { 2 } else { 1 })
        }
    }
}
