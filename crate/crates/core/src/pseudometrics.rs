//! Closed-form pseudometrics `P_k^(N)(λ)`, `k = 1..=N`.
//!
//! Each `P_k` is real, symmetric and persymmetric, solves `Hᵀ P = P H` for the
//! two-center Hamiltonian, and has a single nonzero entry in its first row,
//! at column `k`. Together they span every metric of the model.
//!
//! * `k = 1`: `diag(α, 1, …, 1, α)`, positive definite on `(-1, 1)`.
//! * `k = N`: the antidiagonal analogue, always indefinite.
//! * `k = 2`, `k = N-1`: two unit (anti)diagonals with the four extreme
//!   entries replaced by `β`.
//! * `3 ≤ k ≤ N-2`: a parallelogram with `γ` at the four vertices, `δ` on the
//!   edges and a chessboard of units inside.
//!
//! with `α = (1-λ)/(1+λ)`, `β = 1-λ`, `γ = (1-λ)/(1+λ²)`, `δ = 1/(1+λ²)`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix;
use crate::scalar::{Entry, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Diagonal,
    Bidiagonal,
    Antibidiagonal,
    Antidiagonal,
    Interior,
}

/// The λ-dependent shape constants. `alpha` is `None` at the pole `λ = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub alpha: Option<f64>,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl ShapeParams {
    pub fn new(lambda: f64) -> Self {
        Self {
            alpha: alpha(&lambda).ok(),
            beta: beta(&lambda),
            gamma: gamma(&lambda),
            delta: delta(&lambda),
        }
    }
}

pub fn alpha<T: Entry>(lambda: &T) -> Result<T> {
    let den = T::one() + lambda.clone();
    if den.is_zero() {
        return Err(Error::CouplingPole);
    }
    Ok((T::one() - lambda.clone()) / den)
}

pub fn beta<T: Entry>(lambda: &T) -> T {
    T::one() - lambda.clone()
}

pub fn gamma<T: Entry>(lambda: &T) -> T {
    (T::one() - lambda.clone()) / (T::one() + lambda.clone() * lambda.clone())
}

pub fn delta<T: Entry>(lambda: &T) -> T {
    T::one() / (T::one() + lambda.clone() * lambda.clone())
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::DimensionTooSmall { n, min })
    } else {
        Ok(())
    }
}

pub fn diagonal_entries<T: Entry>(n: usize, lambda: &T) -> Result<DMatrix<T>> {
    check_n(n, 2)?;
    let a = alpha(lambda)?;
    let mut p = DMatrix::from_element(n, n, T::zero());
    for i in 0..n {
        p[(i, i)] = T::one();
    }
    p[(0, 0)] = a.clone();
    p[(n - 1, n - 1)] = a;
    Ok(p)
}

pub fn antidiagonal_entries<T: Entry>(n: usize, lambda: &T) -> Result<DMatrix<T>> {
    check_n(n, 2)?;
    let a = alpha(lambda)?;
    let mut p = DMatrix::from_element(n, n, T::zero());
    for i in 0..n {
        p[(i, n - 1 - i)] = T::one();
    }
    p[(0, n - 1)] = a.clone();
    p[(n - 1, 0)] = a;
    Ok(p)
}

pub fn bidiagonal_entries<T: Entry>(n: usize, lambda: &T) -> Result<DMatrix<T>> {
    check_n(n, 3)?;
    let b = beta(lambda);
    let mut p = DMatrix::from_element(n, n, T::zero());
    for i in 0..n - 1 {
        p[(i, i + 1)] = T::one();
        p[(i + 1, i)] = T::one();
    }
    // at n = 3 the two pairs coincide; the entry is β, not β²
    for (i, j) in [(0, 1), (1, 0), (n - 2, n - 1), (n - 1, n - 2)] {
        p[(i, j)] = b.clone();
    }
    Ok(p)
}

pub fn antibidiagonal_entries<T: Entry>(n: usize, lambda: &T) -> Result<DMatrix<T>> {
    check_n(n, 3)?;
    let b = beta(lambda);
    let mut p = DMatrix::from_element(n, n, T::zero());
    for i in 0..n {
        for j in 0..n {
            if i + j == n - 2 || i + j == n {
                p[(i, j)] = T::one();
            }
        }
    }
    for (i, j) in [(0, n - 2), (n - 2, 0), (1, n - 1), (n - 1, 1)] {
        p[(i, j)] = b.clone();
    }
    Ok(p)
}

/// Parallelogram pseudometric for `3 ≤ k ≤ n-2` (1-based `k`).
pub fn interior_entries<T: Entry>(n: usize, k: usize, lambda: &T) -> Result<DMatrix<T>> {
    check_n(n, 5)?;
    if !(3..=n - 2).contains(&k) {
        return Err(Error::IndexOutOfRange {
            n,
            k,
            min: 3,
            max: n - 2,
        });
    }
    let g = gamma(lambda);
    let d = delta(lambda);
    let lower = k + 1;
    let upper = 2 * n + 1 - k;
    let width = k - 1;
    let vertices = [(1, k), (k, 1), (n + 1 - k, n), (n, n + 1 - k)];
    let mut p = DMatrix::from_element(n, n, T::zero());
    for r in 1..=n {
        for c in 1..=n {
            let sum = r + c;
            let diff = r.abs_diff(c);
            if sum < lower || sum > upper || diff > width || !(sum - lower).is_multiple_of(2) {
                continue;
            }
            p[(r - 1, c - 1)] = if vertices.contains(&(r, c)) {
                g.clone()
            } else if sum == lower || sum == upper || diff == width {
                d.clone()
            } else {
                T::one()
            };
        }
    }
    Ok(p)
}

/// Which closed form represents index `k` at dimension `n`.
pub fn construction_for(n: usize, k: usize) -> Result<Construction> {
    check_n(n, 2)?;
    if !(1..=n).contains(&k) {
        return Err(Error::IndexOutOfRange {
            n,
            k,
            min: 1,
            max: n,
        });
    }
    Ok(if k == 1 {
        Construction::Diagonal
    } else if k == n {
        Construction::Antidiagonal
    } else if k == 2 {
        Construction::Bidiagonal
    } else if k == n - 1 {
        Construction::Antibidiagonal
    } else {
        Construction::Interior
    })
}

/// Dispatches to the closed form for `(n, k)` in any field.
pub fn pseudometric_entries<T: Entry>(n: usize, k: usize, lambda: &T) -> Result<DMatrix<T>> {
    match construction_for(n, k)? {
        Construction::Diagonal => diagonal_entries(n, lambda),
        Construction::Antidiagonal => antidiagonal_entries(n, lambda),
        Construction::Bidiagonal => bidiagonal_entries(n, lambda),
        Construction::Antibidiagonal => antibidiagonal_entries(n, lambda),
        Construction::Interior => interior_entries(n, k, lambda),
    }
}

pub fn pseudometric_exact(n: usize, k: usize, lambda: Rational) -> Result<DMatrix<Rational>> {
    pseudometric_entries(n, k, &lambda)
}

/// A closed-form pseudometric with its index and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Pseudometric {
    n: usize,
    k: usize,
    lambda: f64,
    construction: Construction,
    entries: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudometricDocument {
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
    pub construction: Construction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl Pseudometric {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    /// Residue of `m + n` (1-based) on nonzero entries, i.e. `(k + 1) mod 2`.
    pub fn parity(&self) -> u8 {
        ((self.k + 1) % 2) as u8
    }

    /// The single nonzero first-row entry, `P[1][k]`.
    pub fn first_row_pivot(&self) -> f64 {
        self.entries[(0, self.k - 1)]
    }

    pub fn to_document(&self) -> PseudometricDocument {
        let lambda = self.lambda;
        let (mut a, mut b, mut g, mut d) = (None, None, None, None);
        match self.construction {
            Construction::Diagonal | Construction::Antidiagonal => a = alpha(&lambda).ok(),
            Construction::Bidiagonal | Construction::Antibidiagonal => b = Some(beta(&lambda)),
            Construction::Interior => {
                g = Some(gamma(&lambda));
                d = Some(delta(&lambda));
            }
        }
        PseudometricDocument {
            n: self.n,
            k: self.k,
            lambda,
            construction: self.construction,
            alpha: a,
            beta: b,
            gamma: g,
            delta: d,
            rows: matrix::rows_of(&self.entries),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document())
            .expect("pseudometric documents always serialize")
    }

    pub fn to_csv(&self) -> String {
        matrix::to_csv(&self.entries)
    }
}

fn finite(lambda: f64) -> Result<f64> {
    if lambda.is_finite() {
        Ok(lambda)
    } else {
        Err(Error::NonFiniteCoupling(lambda))
    }
}

fn wrap(
    n: usize,
    k: usize,
    lambda: f64,
    construction: Construction,
    entries: DMatrix<f64>,
) -> Pseudometric {
    Pseudometric {
        n,
        k,
        lambda,
        construction,
        entries,
    }
}

/// `P_1 = diag(α, 1, …, 1, α)`.
pub fn p_diagonal(n: usize, lambda: f64) -> Result<Pseudometric> {
    let lambda = finite(lambda)?;
    Ok(wrap(
        n,
        1,
        lambda,
        Construction::Diagonal,
        diagonal_entries(n, &lambda)?,
    ))
}

/// `P_N`: unit antidiagonal with corners `α`.
pub fn p_antidiagonal(n: usize, lambda: f64) -> Result<Pseudometric> {
    let lambda = finite(lambda)?;
    Ok(wrap(
        n,
        n,
        lambda,
        Construction::Antidiagonal,
        antidiagonal_entries(n, &lambda)?,
    ))
}

/// `P_2`.
pub fn p_bidiagonal(n: usize, lambda: f64) -> Result<Pseudometric> {
    let lambda = finite(lambda)?;
    Ok(wrap(
        n,
        2,
        lambda,
        Construction::Bidiagonal,
        bidiagonal_entries(n, &lambda)?,
    ))
}

/// `P_{N-1}`; at `n = 3` this is the same matrix as `P_2`, so `n ≥ 4` is required.
pub fn p_antibidiagonal(n: usize, lambda: f64) -> Result<Pseudometric> {
    let lambda = finite(lambda)?;
    check_n(n, 4)?;
    Ok(wrap(
        n,
        n - 1,
        lambda,
        Construction::Antibidiagonal,
        antibidiagonal_entries(n, &lambda)?,
    ))
}

pub fn p_interior(n: usize, k: usize, lambda: f64) -> Result<Pseudometric> {
    let lambda = finite(lambda)?;
    Ok(wrap(
        n,
        k,
        lambda,
        Construction::Interior,
        interior_entries(n, k, &lambda)?,
    ))
}

pub fn pseudometric(n: usize, k: usize, lambda: f64) -> Result<Pseudometric> {
    let lambda = finite(lambda)?;
    let construction = construction_for(n, k)?;
    Ok(wrap(
        n,
        k,
        lambda,
        construction,
        pseudometric_entries(n, k, &lambda)?,
    ))
}

/// All `n` basis members `P_1..P_n`.
pub fn basis(n: usize, lambda: f64) -> Result<Vec<Pseudometric>> {
    (1..=n).map(|k| pseudometric(n, k, lambda)).collect()
}

/// True when every nonzero entry sits on the colour `m + n ≡ k + 1 (mod 2)`.
pub fn obeys_chessboard<T: Entry>(m: &DMatrix<T>, k: usize) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| (i + j + 2 + k) % 2 == 1 || m[(i, j)].is_zero()))
}

/// 1-based columns of the nonzero first-row entries.
pub fn first_row_support<T: Entry>(m: &DMatrix<T>) -> Vec<usize> {
    (0..m.ncols())
        .filter(|&j| !m[(0, j)].is_zero())
        .map(|j| j + 1)
        .collect()
}

/// Aligned text grid of exact entries, integers printed without denominator.
pub fn format_rational_grid(m: &DMatrix<Rational>) -> String {
    let cells: Vec<Vec<String>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].to_string()).collect())
        .collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(out, "{}", line.join("  "));
    }
    out
}
