//! Discrete two-center PT-symmetric square well.
//!
//! The crate builds the tridiagonal Hamiltonians `H^(N)(λ)`, computes and
//! classifies their spectra, constructs the complete closed-form basis of
//! pseudometrics `P_k^(N)(λ)` solving `Hᵀ P = P H`, and checks all of it
//! against a brute-force null-space solver of the intertwining equations.
//!
//! ```
//! use ptwell_core::{model, pseudometrics, metrics};
//!
//! let h = model::build_two_center(6, 0.4).unwrap();
//! let p = pseudometrics::pseudometric(6, 3, 0.4).unwrap();
//! assert!(metrics::intertwining_residual(h.entries(), p.entries()) < 1e-14);
//! ```

pub mod error;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod pseudometrics;
pub mod scalar;
pub mod spectra;

pub use error::{Error, Result};
pub use metrics::{DysonMap, MetricCandidate, Positivity};
pub use model::{Coupling, GridSpec, HamiltonianKind, HamiltonianMatrix};
pub use oracle::{IntertwinerSystem, OracleBasis};
pub use pseudometrics::{Construction, Pseudometric, ShapeParams};
pub use scalar::{Entry, Rational};
pub use spectra::{SpectrumReport, SweepTable};
