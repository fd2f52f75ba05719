//! Hamiltonian builders.
//!
//! Three tridiagonal families are supported: the two-center PT-symmetric
//! square well `H^(N)(λ)`, a generic chain with per-bond couplings `u_k`, and
//! the plain three-point discretization of `-ψ'' + Vψ` on a uniform grid.
//!
//! All indices in file formats are 1-based; storage is 0-based.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix;
use crate::scalar::{Entry, Rational};

/// Dimensionless coupling λ. Any finite value is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coupling(f64);

impl Coupling {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() {
            Ok(Self(lambda))
        } else {
            Err(Error::NonFiniteCoupling(lambda))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Inside the open interval (-1, 1) where the spectrum is real and simple.
    pub fn is_physical(self) -> bool {
        self.0.abs() < 1.0
    }
}

impl TryFrom<f64> for Coupling {
    type Error = Error;

    fn try_from(lambda: f64) -> Result<Self> {
        Self::new(lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKind {
    TwoCenter,
    GenericChain,
    DiscretizedPotential,
}

impl HamiltonianKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::TwoCenter => "two_center",
            Self::GenericChain => "generic_chain",
            Self::DiscretizedPotential => "discretized_potential",
        }
    }
}

/// A real tridiagonal Hamiltonian matrix, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    kind: HamiltonianKind,
    lambda: Option<f64>,
    entries: DMatrix<f64>,
}

/// Serialized form: `{ "n", "kind", "lambda", "rows" }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub n: usize,
    pub kind: HamiltonianKind,
    pub lambda: Option<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl HamiltonianMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn kind(&self) -> HamiltonianKind {
        self.kind
    }

    /// The coupling, for the two-center family only.
    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// 1-based element access.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row - 1, col - 1)]
    }

    pub fn to_document(&self) -> MatrixDocument {
        MatrixDocument {
            n: self.n(),
            kind: self.kind,
            lambda: self.lambda,
            rows: matrix::rows_of(&self.entries),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document())
            .expect("matrix documents always serialize")
    }

    pub fn to_csv(&self) -> String {
        matrix::to_csv(&self.entries)
    }

    pub fn from_document(doc: MatrixDocument) -> Result<Self> {
        let entries =
            matrix::from_rows(&doc.rows).ok_or_else(|| Error::Format("ragged rows".into()))?;
        if entries.nrows() != doc.n || entries.ncols() != doc.n {
            return Err(Error::Format(format!(
                "declared n = {} but rows are {}x{}",
                doc.n,
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix rows"));
        }
        if !matrix::is_tridiagonal(&entries) {
            return Err(Error::Format("matrix is not tridiagonal".into()));
        }
        Ok(Self {
            kind: doc.kind,
            lambda: doc.lambda,
            entries,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MatrixDocument =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_document(doc)
    }
}

/// The two-center entries for any field; only the four corner-adjacent
/// off-diagonal elements carry λ.
pub fn two_center_entries<T: Entry>(n: usize, lambda: &T) -> Result<DMatrix<T>> {
    if n < 3 {
        return Err(Error::DimensionTooSmall { n, min: 3 });
    }
    let one = T::one();
    let mut h = DMatrix::from_element(n, n, T::zero());
    for i in 0..n {
        h[(i, i)] = T::from_i32(2);
    }
    for i in 0..n - 1 {
        h[(i, i + 1)] = -one.clone();
        h[(i + 1, i)] = -one.clone();
    }
    h[(0, 1)] = -one.clone() - lambda.clone();
    h[(1, 0)] = -one.clone() + lambda.clone();
    h[(n - 2, n - 1)] = -one.clone() + lambda.clone();
    h[(n - 1, n - 2)] = -one - lambda.clone();
    Ok(h)
}

pub fn build_two_center(n: usize, lambda: f64) -> Result<HamiltonianMatrix> {
    let coupling = Coupling::new(lambda)?;
    Ok(HamiltonianMatrix {
        kind: HamiltonianKind::TwoCenter,
        lambda: Some(coupling.value()),
        entries: two_center_entries(n, &coupling.value())?,
    })
}

/// Exact-arithmetic version of [`build_two_center`].
pub fn build_two_center_exact(n: usize, lambda: Rational) -> Result<DMatrix<Rational>> {
    two_center_entries(n, &lambda)
}

/// Generic chain: `(k,k) = diag[k]`, `(k,k+1) = -1 - u_k`, `(k+1,k) = -1 + u_k`.
///
/// The diagonal is taken as already combined (`2 + h²V(x_k)`).
pub fn build_generic_chain(diag: &[f64], couplings: &[f64]) -> Result<HamiltonianMatrix> {
    let n = diag.len();
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    if couplings.len() != n - 1 {
        return Err(Error::LengthMismatch {
            what: "chain couplings",
            expected: n - 1,
            got: couplings.len(),
        });
    }
    if diag.iter().chain(couplings).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("chain parameters"));
    }
    let mut h = DMatrix::zeros(n, n);
    for (i, d) in diag.iter().enumerate() {
        h[(i, i)] = *d;
    }
    for (i, u) in couplings.iter().enumerate() {
        h[(i, i + 1)] = -1.0 - u;
        h[(i + 1, i)] = -1.0 + u;
    }
    Ok(HamiltonianMatrix {
        kind: HamiltonianKind::GenericChain,
        lambda: None,
        entries: h,
    })
}

/// Uniform grid `x_k = k·h`, `k = -K..=K`, with Dirichlet walls at `±(K+1)h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    k_max: usize,
    spacing: f64,
    potential: Vec<f64>,
}

impl GridSpec {
    /// `potential` holds `V(x_k)` for `k = -K..=K` in order.
    pub fn new(k_max: usize, spacing: f64, potential: Vec<f64>) -> Result<Self> {
        if k_max < 1 {
            return Err(Error::InvalidHalfWidth(k_max));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidSpacing(spacing));
        }
        if potential.len() != 2 * k_max + 1 {
            return Err(Error::LengthMismatch {
                what: "potential samples",
                expected: 2 * k_max + 1,
                got: potential.len(),
            });
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("potential samples"));
        }
        Ok(Self {
            k_max,
            spacing,
            potential,
        })
    }

    /// Samples `v(x)` at every grid point.
    pub fn sampled(k_max: usize, spacing: f64, v: impl Fn(f64) -> f64) -> Result<Self> {
        let k = k_max as i64;
        let potential = (-k..=k).map(|i| v(i as f64 * spacing)).collect();
        Self::new(k_max, spacing, potential)
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn dimension(&self) -> usize {
        2 * self.k_max + 1
    }

    /// Half-length `L = K·h`.
    pub fn half_length(&self) -> f64 {
        self.k_max as f64 * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        let k = self.k_max as i64;
        (-k..=k).map(|i| i as f64 * self.spacing).collect()
    }
}

/// Diagonal `2 + h²V(x_k)`, off-diagonals `-1`.
pub fn build_from_potential(grid: &GridSpec) -> Result<HamiltonianMatrix> {
    let h2 = grid.spacing * grid.spacing;
    let diag: Vec<f64> = grid.potential.iter().map(|v| 2.0 + h2 * v).collect();
    let chain = build_generic_chain(&diag, &vec![0.0; diag.len() - 1])?;
    Ok(HamiltonianMatrix {
        kind: HamiltonianKind::DiscretizedPotential,
        ..chain
    })
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn transpose_flips_the_coupling(n in 3usize..40, lambda in -5.0f64..5.0) {
            let h = build_two_center(n, lambda).unwrap();
            let mirrored = build_two_center(n, -lambda).unwrap();
            prop_assert_eq!(h.entries().transpose(), mirrored.entries().clone());
        }

        #[test]
        fn coupling_lives_in_the_corners(n in 3usize..40, lambda in -5.0f64..5.0) {
            let h = build_two_center(n, lambda).unwrap();
            let h0 = build_two_center(n, 0.0).unwrap();
            prop_assert!(matrix::is_tridiagonal(h.entries()));
            let corners = [(0, 1), (1, 0), (n - 2, n - 1), (n - 1, n - 2)];
            for a in 0..n {
                for b in 0..n {
                    let d = h.entries()[(a, b)] - h0.entries()[(a, b)];
                    if corners.contains(&(a, b)) {
                        prop_assert!((d.abs() - lambda.abs()).abs() < 1e-15);
                    } else {
                        prop_assert_eq!(d, 0.0);
                    }
                }
            }
        }

        #[test]
        fn chain_embedding_agrees(n in 3usize..30, lambda in -3.0f64..3.0) {
            let mut u = vec![0.0; n - 1];
            u[0] = lambda;
            u[n - 2] = -lambda;
            let chain = build_generic_chain(&vec![2.0; n], &u).unwrap();
            let direct = build_two_center(n, lambda).unwrap();
            prop_assert_eq!(chain.entries(), direct.entries());
        }

        #[test]
        fn json_round_trip(n in 3usize..12, lambda in -3.0f64..3.0) {
            let h = build_two_center(n, lambda).unwrap();
            let back = HamiltonianMatrix::from_json(&h.to_json()).unwrap();
            prop_assert_eq!(back.entries(), h.entries());
        }
    }
}
