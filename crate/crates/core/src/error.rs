use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {n} is below the minimum {min}")]
    DimensionTooSmall { n: usize, min: usize },

    #[error("coupling must be finite, got {0}")]
    NonFiniteCoupling(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("grid spacing must be positive, got {0}")]
    InvalidSpacing(f64),

    #[error("grid half-width K must be at least 1, got {0}")]
    InvalidHalfWidth(usize),

    #[error("λ = -1 is a pole of α = (1-λ)/(1+λ)")]
    CouplingPole,

    #[error("index k = {k} is outside {min}..={max} for n = {n}")]
    IndexOutOfRange {
        n: usize,
        k: usize,
        min: usize,
        max: usize,
    },

    #[error("eigensolver did not converge{}", lambda.map(|l| format!(" at λ = {l}")).unwrap_or_default())]
    EigenNoConvergence { lambda: Option<f64> },

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("invalid λ range: need lambda_min < lambda_max, got [{min}, {max}]")]
    InvalidRange { min: f64, max: f64 },

    #[error("a sweep needs at least 2 grid points, got {0}")]
    InvalidSteps(usize),

    #[error("no closed-form spectrum for n = {0} (supported: 3, 4, 5, 7, 9)")]
    UnsupportedDimension(usize),

    #[error("|λ| must exceed 1 to count fragile energies, got λ = {0}")]
    NotOutsideInterval(f64),

    #[error(
        "ambiguous numerical rank: singular value {singular_value:e} lies within a factor 10 of the threshold {threshold:e}"
    )]
    AmbiguousRank { threshold: f64, singular_value: f64 },

    #[error("metric is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("span comparison needs equal dimensions: {left} vs {right}")]
    SpanMismatch { left: usize, right: usize },

    #[error("invalid matrix document: {0}")]
    Format(String),
}
