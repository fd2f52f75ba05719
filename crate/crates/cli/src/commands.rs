use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use ptwell_core::oracle::{self, OracleReport, DEFAULT_RANK_TOL};
use ptwell_core::spectra::{self, SweepRow, SweepTable, DEFAULT_REALITY_TOL};
use ptwell_core::{metrics, model, pseudometrics};
use serde::Serialize;

use crate::coupling::CouplingArg;
use crate::output::{emit, json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixFormat {
    Json,
    Csv,
    /// Exact rational grid; needs a decimal or p/q coupling.
    Text,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub n: usize,
    /// Single coupling; overrides the sweep range.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    pub lmin: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub lmax: f64,
    /// Grid points including both endpoints.
    #[arg(long, default_value_t = 401)]
    pub steps: usize,
    /// Relative `|Im E|` threshold for calling an eigenvalue real.
    #[arg(long, default_value_t = DEFAULT_REALITY_TOL)]
    pub reality_tol: f64,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn spectrum(args: &SpectrumArgs) -> Result<()> {
    let table = match args.lambda {
        Some(lambda) => {
            let h = model::build_two_center(args.n, lambda)?;
            let report = spectra::compute_spectrum(&h, args.reality_tol)?;
            SweepTable {
                n: args.n,
                lambda_grid: vec![lambda],
                rows: vec![SweepRow {
                    lambda,
                    degenerate: report.is_degenerate(),
                    eigenvalues: report.eigenvalues,
                    num_complex: report.num_complex,
                    all_real: report.all_real,
                    min_gap: report.min_gap,
                }],
            }
        }
        None => spectra::sweep(args.n, args.lmin, args.lmax, args.steps, args.reality_tol)?,
    };
    let text = match args.format {
        TableFormat::Csv => table.to_csv(),
        TableFormat::Json => json(&table)?,
    };
    emit(&text, args.out.as_deref())
}

#[derive(Debug, Args)]
pub struct PseudometricArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// Decimal or fraction, e.g. `0.5` or `-1/3`.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: CouplingArg,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Json)]
    pub format: MatrixFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn pseudometric(args: &PseudometricArgs) -> Result<()> {
    let text = match args.format {
        MatrixFormat::Text => {
            let Some(exact) = args.lambda.exact else {
                bail!(crate::UsageError(format!(
                    "text format needs a decimal or p/q coupling, got '{}'",
                    args.lambda
                )));
            };
            let m = pseudometrics::pseudometric_exact(args.n, args.k, exact)?;
            pseudometrics::format_rational_grid(&m)
        }
        MatrixFormat::Json => {
            pseudometrics::pseudometric(args.n, args.k, args.lambda.value)?.to_json()
        }
        MatrixFormat::Csv => {
            pseudometrics::pseudometric(args.n, args.k, args.lambda.value)?.to_csv()
        }
    };
    emit(&text, args.out.as_deref())
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Relative singular-value threshold for the null space.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn oracle(args: &OracleArgs) -> Result<()> {
    let h = model::build_two_center(args.n, args.lambda)?;
    let basis = oracle::null_space(&oracle::assemble_system(&h), args.rank_tol)?;
    let comparison = if basis.nullity() == args.n {
        match pseudometrics::basis(args.n, args.lambda) {
            Ok(closed) => Some(oracle::compare_span(&basis, &closed)?),
            Err(ptwell_core::Error::CouplingPole) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let report = OracleReport::new(&basis, comparison.as_ref());
    emit(&json(&report)?, args.out.as_deref())
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Comma-separated coefficients μ_1..μ_N of `Θ = Σ μ_k P_k`.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        conflicts_with = "sobolev",
        required_unless_present = "sobolev"
    )]
    pub mu: Option<Vec<f64>>,
    /// Use the tridiagonal `Θ = 2P_1 - cP_2` with this `c`.
    #[arg(long, allow_negative_numbers = true)]
    pub sobolev: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct MetricOutput {
    #[serde(flatten)]
    report: metrics::HermitizationReport,
    theta: Vec<Vec<f64>>,
}

pub fn metric(args: &MetricArgs) -> Result<()> {
    let theta = match (&args.mu, args.sobolev) {
        (Some(mu), _) => metrics::assemble_metric(args.n, args.lambda, mu)?,
        (None, Some(c)) => metrics::sobolev_metric(args.n, args.lambda, c)?,
        (None, None) => bail!(crate::UsageError(
            "one of --mu or --sobolev is required".into()
        )),
    };
    let h = model::build_two_center(args.n, args.lambda)?;
    let report = metrics::check_hermitization(&h, &theta)?;
    let out = MetricOutput {
        report,
        theta: ptwell_core::matrix::rows_of(theta.theta()),
    };
    emit(&json(&out)?, args.out.as_deref())
}
