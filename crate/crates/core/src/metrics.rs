//! Metric candidates `Θ = Σ μ_k P_k`, positivity, the physical inner product,
//! the Dyson map `Ω = Θ^{1/2}` and the hermitization check.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, commutator_transposed};
use crate::model::HamiltonianMatrix;
use crate::pseudometrics;
use crate::spectra;

/// Relative tolerance on the smallest eigenvalue for positivity.
pub const POS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Positivity {
    PositiveDefinite,
    Indefinite,
    Singular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricCandidate {
    n: usize,
    lambda: f64,
    mu: Vec<f64>,
    theta: DMatrix<f64>,
    positivity: Positivity,
    min_eigenvalue: f64,
}

impl MetricCandidate {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn positivity(&self) -> Positivity {
        self.positivity
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn is_positive_definite(&self) -> bool {
        self.positivity == Positivity::PositiveDefinite
    }
}

fn classify(theta: &DMatrix<f64>) -> (Positivity, f64) {
    let eig = spectra::symmetric_eigenvalues(theta);
    let min = eig.first().copied().unwrap_or(0.0);
    let scale = eig.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let tol = POS_TOL * scale;
    let tag = if min.abs() <= tol {
        Positivity::Singular
    } else if min > tol {
        Positivity::PositiveDefinite
    } else {
        Positivity::Indefinite
    };
    (tag, min)
}

/// `Θ = Σ μ_k P_k(λ)`. Members with `μ_k = 0` are not constructed, so the
/// α pole at `λ = -1` only matters when `μ_1` or `μ_N` is nonzero.
pub fn assemble_metric(n: usize, lambda: f64, mu: &[f64]) -> Result<MetricCandidate> {
    if mu.len() != n {
        return Err(Error::LengthMismatch {
            what: "metric coefficients",
            expected: n,
            got: mu.len(),
        });
    }
    if mu.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("metric coefficients"));
    }
    if !lambda.is_finite() {
        return Err(Error::NonFiniteCoupling(lambda));
    }
    let mut theta = DMatrix::zeros(n, n);
    for (k, &m) in mu.iter().enumerate() {
        if m != 0.0 {
            theta += pseudometrics::pseudometric_entries(n, k + 1, &lambda)? * m;
        }
    }
    let (positivity, min_eigenvalue) = classify(&theta);
    Ok(MetricCandidate {
        n,
        lambda,
        mu: mu.to_vec(),
        theta,
        positivity,
        min_eigenvalue,
    })
}

/// The tridiagonal `Θ = 2 P_1 - c P_2`.
pub fn sobolev_metric(n: usize, lambda: f64, c: f64) -> Result<MetricCandidate> {
    if n < 3 {
        return Err(Error::DimensionTooSmall { n, min: 3 });
    }
    let mut mu = vec![0.0; n];
    mu[0] = 2.0;
    mu[1] = -c;
    assemble_metric(n, lambda, &mu)
}

/// `⟨ψ|Θ|φ⟩ = Σ_{k,n} conj(ψ_k) Θ_{kn} φ_n`.
pub fn inner_product(
    theta: &MetricCandidate,
    psi: &[Complex64],
    phi: &[Complex64],
) -> Result<Complex64> {
    let n = theta.n;
    for v in [psi, phi] {
        if v.len() != n {
            return Err(Error::LengthMismatch {
                what: "state vector",
                expected: n,
                got: v.len(),
            });
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, p) in psi.iter().enumerate() {
        let row: Complex64 = (0..n).map(|j| phi[j] * theta.theta[(k, j)]).sum();
        acc += p.conj() * row;
    }
    Ok(acc)
}

/// Symmetric positive square root of a metric and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct DysonMap {
    omega: DMatrix<f64>,
    omega_inv: DMatrix<f64>,
}

impl DysonMap {
    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.omega_inv
    }

    /// `𝔥 = Ω H Ω⁻¹`.
    pub fn hermitize(&self, h: &DMatrix<f64>) -> DMatrix<f64> {
        &self.omega * h * &self.omega_inv
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

pub fn dyson_map(theta: &MetricCandidate) -> Result<DysonMap> {
    if !theta.is_positive_definite() {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: theta.min_eigenvalue,
        });
    }
    let eig = SymmetricEigen::new(theta.theta.clone());
    let v = &eig.eigenvectors;
    let root = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|w| w.sqrt()),
    );
    let inv_root = root.map(|r| 1.0 / r);
    let omega = symmetrize(v * DMatrix::from_diagonal(&root) * v.transpose());
    let omega_inv = symmetrize(v * DMatrix::from_diagonal(&inv_root) * v.transpose());
    Ok(DysonMap { omega, omega_inv })
}

pub fn intertwining_residual(h: &DMatrix<f64>, theta: &DMatrix<f64>) -> f64 {
    matrix::max_abs(&commutator_transposed(h, theta))
}

/// Residual scaled by `max|H| · max|Θ|`.
pub fn relative_intertwining_residual(h: &DMatrix<f64>, theta: &DMatrix<f64>) -> f64 {
    let scale = matrix::max_abs(h) * matrix::max_abs(theta);
    if scale == 0.0 {
        return 0.0;
    }
    intertwining_residual(h, theta) / scale
}

/// Check report; `residual_sym` and `spectral_match` are present only for a
/// positive-definite metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitizationReport {
    pub n: usize,
    pub lambda: f64,
    pub mu: Vec<f64>,
    pub min_eigenvalue: f64,
    pub positivity: Positivity,
    pub residual_quasi: f64,
    pub residual_sym: Option<f64>,
    pub spectral_match: Option<f64>,
}

impl HermitizationReport {
    pub fn hermitized(&self) -> bool {
        self.residual_sym.is_some()
    }
}

pub fn check_hermitization(
    h: &HamiltonianMatrix,
    theta: &MetricCandidate,
) -> Result<HermitizationReport> {
    if h.n() != theta.n {
        return Err(Error::LengthMismatch {
            what: "metric dimension",
            expected: h.n(),
            got: theta.n,
        });
    }
    let residual_quasi = intertwining_residual(h.entries(), &theta.theta);
    let (residual_sym, spectral_match) = if theta.is_positive_definite() {
        let dyson = dyson_map(theta)?;
        let small_h = dyson.hermitize(h.entries());
        let asym = matrix::max_abs(&(&small_h - small_h.transpose()));
        let original = spectra::eigenvalues(h.entries())?;
        let image: Vec<Complex64> = spectra::symmetric_eigenvalues(&symmetrize(small_h))
            .into_iter()
            .map(|e| Complex64::new(e, 0.0))
            .collect();
        (
            Some(asym),
            Some(spectra::spectral_distance(&original, &image)),
        )
    } else {
        (None, None)
    };
    Ok(HermitizationReport {
        n: theta.n,
        lambda: theta.lambda,
        mu: theta.mu.clone(),
        min_eigenvalue: theta.min_eigenvalue,
        positivity: theta.positivity,
        residual_quasi,
        residual_sym,
        spectral_match,
    })
}

/// Shrinks `[inside, outside]` on a one-parameter family until it is at most
/// `width` wide. `inside` must be positive definite and `outside` not.
pub fn bisect_positivity(
    family: impl Fn(f64) -> Result<MetricCandidate>,
    mut inside: f64,
    mut outside: f64,
    width: f64,
) -> Result<(f64, f64)> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::InvalidTolerance(width));
    }
    let start = family(inside)?;
    if !start.is_positive_definite() {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: start.min_eigenvalue,
        });
    }
    if family(outside)?.is_positive_definite() {
        return Err(Error::InvalidRange {
            min: inside,
            max: outside,
        });
    }
    while (outside - inside).abs() > width {
        let mid = 0.5 * (inside + outside);
        if family(mid)?.is_positive_definite() {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok((inside, outside))
}

/// Bracket of the coupling `c` where `2P_1 - cP_2` stops being positive definite.
pub fn sobolev_transition(
    n: usize,
    lambda: f64,
    c_inside: f64,
    c_outside: f64,
    width: f64,
) -> Result<(f64, f64)> {
    bisect_positivity(|c| sobolev_metric(n, lambda, c), c_inside, c_outside, width)
}

/// A point on each side of the positivity boundary in μ-space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryBracket {
    pub inside: Vec<f64>,
    pub outside: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivitySample {
    pub samples: usize,
    pub positive: usize,
    pub positive_fraction: f64,
    pub brackets: Vec<BoundaryBracket>,
}

const MAX_BRACKETS: usize = 8;

/// Uniform sampling of `μ` in the box `[lower, upper]`. Brackets are refined
/// along segments from the first positive sample to non-positive ones; the
/// positive cone is convex so each segment crosses the boundary once.
pub fn sample_positivity(
    n: usize,
    lambda: f64,
    lower: &[f64],
    upper: &[f64],
    samples: usize,
    seed: u64,
) -> Result<PositivitySample> {
    for b in [lower, upper] {
        if b.len() != n {
            return Err(Error::LengthMismatch {
                what: "sampling box",
                expected: n,
                got: b.len(),
            });
        }
    }
    if lower
        .iter()
        .zip(upper)
        .any(|(l, u)| l.partial_cmp(u).is_none_or(|o| o.is_gt()))
    {
        return Err(Error::Format("sampling box has lower > upper".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inside: Vec<Vec<f64>> = Vec::new();
    let mut outside: Vec<Vec<f64>> = Vec::new();
    for _ in 0..samples {
        let mu: Vec<f64> = lower
            .iter()
            .zip(upper)
            .map(|(l, u)| if l == u { *l } else { rng.random_range(*l..*u) })
            .collect();
        if assemble_metric(n, lambda, &mu)?.is_positive_definite() {
            inside.push(mu);
        } else {
            outside.push(mu);
        }
    }
    let mut brackets = Vec::new();
    if let Some(anchor) = inside.first() {
        for far in outside.iter().take(MAX_BRACKETS) {
            let along = |t: f64| -> Vec<f64> {
                anchor
                    .iter()
                    .zip(far)
                    .map(|(a, b)| a + t * (b - a))
                    .collect()
            };
            let (t_in, t_out) =
                bisect_positivity(|t| assemble_metric(n, lambda, &along(t)), 0.0, 1.0, 1e-9)?;
            brackets.push(BoundaryBracket {
                inside: along(t_in),
                outside: along(t_out),
            });
        }
    }
    Ok(PositivitySample {
        samples,
        positive: inside.len(),
        positive_fraction: if samples == 0 {
            0.0
        } else {
            inside.len() as f64 / samples as f64
        },
        brackets,
    })
}
