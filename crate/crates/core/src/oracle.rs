//! Brute-force solver of the intertwining equations `Hᵀ Θ - Θ H = 0`.
//!
//! The unknowns are the `N(N+1)/2` upper-triangle entries of a symmetric `Θ`,
//! ordered row-major: `(1,1), (1,2), …, (1,N), (2,2), …`. Equation `(j, n)` is
//! row `(j-1)·N + (n-1)`, so the 1-based row number matches the item
//! numbering used when the small cases are worked by hand.
//!
//! This module deliberately shares no code with [`crate::pseudometrics`].

use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix;
use crate::model::HamiltonianMatrix;
use crate::pseudometrics::Pseudometric;

pub const DEFAULT_RANK_TOL: f64 = 1e-10;

const PIVOT_TOL: f64 = 1e-8;

/// Column of the symmetric unknown `Θ[a][b]` (0-based, either order).
pub fn unknown_index(n: usize, a: usize, b: usize) -> usize {
    let (i, j) = if a <= b { (a, b) } else { (b, a) };
    i * n - i * (i + 1) / 2 + j
}

pub fn unknown_count(n: usize) -> usize {
    n * (n + 1) / 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntertwinerSystem {
    pub n: usize,
    pub lambda: Option<f64>,
    /// `N² × N(N+1)/2`.
    pub matrix: DMatrix<f64>,
}

impl IntertwinerSystem {
    /// 1-based numbers of rows that vanish identically.
    pub fn trivial_items(&self) -> Vec<usize> {
        (0..self.matrix.nrows())
            .filter(|&r| self.matrix.row(r).iter().all(|v| *v == 0.0))
            .map(|r| r + 1)
            .collect()
    }

    /// Unpacks a vector of upper-triangle unknowns into a symmetric matrix.
    pub fn to_matrix(&self, coords: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |a, b| coords[unknown_index(n, a, b)])
    }
}

/// Assembles `Σ_k [Hᵀ_{jk} Θ_{kn} - Θ_{jk} H_{kn}] = 0` over symmetric `Θ`.
pub fn assemble_system(h: &HamiltonianMatrix) -> IntertwinerSystem {
    let n = h.n();
    let hm = h.entries();
    let mut sys = DMatrix::zeros(n * n, unknown_count(n));
    for j in 0..n {
        for l in 0..n {
            let row = j * n + l;
            for k in 0..n {
                // Hᵀ_{jk} = H_{kj}
                sys[(row, unknown_index(n, k, l))] += hm[(k, j)];
                sys[(row, unknown_index(n, j, k))] -= hm[(k, l)];
            }
        }
    }
    IntertwinerSystem {
        n,
        lambda: h.lambda(),
        matrix: sys,
    }
}

/// Same equations over an unconstrained `Θ` with `N²` row-major unknowns.
pub fn assemble_general_system(h: &HamiltonianMatrix) -> DMatrix<f64> {
    let n = h.n();
    let hm = h.entries();
    let mut sys = DMatrix::zeros(n * n, n * n);
    for j in 0..n {
        for l in 0..n {
            let row = j * n + l;
            for k in 0..n {
                sys[(row, k * n + l)] += hm[(k, j)];
                sys[(row, j * n + k)] -= hm[(k, l)];
            }
        }
    }
    sys
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Member `j` has first row equal to `e_j`.
    FirstRowPivot,
    /// Pivot normalization failed; members are the raw orthonormal basis.
    Orthonormal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleBasis {
    pub n: usize,
    pub lambda: Option<f64>,
    pub members: Vec<DMatrix<f64>>,
    pub normalization: Normalization,
    /// Descending singular values of the system matrix.
    pub singular_values: Vec<f64>,
}

impl OracleBasis {
    pub fn nullity(&self) -> usize {
        self.members.len()
    }

    pub fn pivot_normalized(&self) -> bool {
        self.normalization == Normalization::FirstRowPivot
    }
}

/// Orthonormal null-space vectors of `a` (as columns) and the sorted
/// singular values.
fn svd_null_space(a: &DMatrix<f64>, rank_tol: f64) -> Result<(Vec<DVector<f64>>, Vec<f64>)> {
    if !(rank_tol.is_finite() && rank_tol > 0.0) {
        return Err(Error::InvalidTolerance(rank_tol));
    }
    let cols = a.ncols();
    // pad to square so that V is always complete
    let padded = if a.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::try_new(padded, false, true, f64::EPSILON, 0)
        .ok_or(Error::EigenNoConvergence { lambda: None })?;
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let threshold = rank_tol * sigma_max;
    if let Some(&s) = sigma
        .iter()
        .find(|&&s| s > threshold / 10.0 && s < threshold * 10.0)
    {
        return Err(Error::AmbiguousRank {
            threshold,
            singular_value: s,
        });
    }
    let null = order
        .iter()
        .filter(|&&i| svd.singular_values[i] <= threshold)
        .map(|&i| v_t.row(i).transpose())
        .collect();
    Ok((null, sigma))
}

/// Gauss-Jordan with partial pivoting on `[F | B]`, where `F` holds the
/// first-row coordinates of each member. Returns `F⁻¹ B` or `None` when a
/// pivot is missing.
fn pivot_normalize(members: &[DMatrix<f64>]) -> Option<Vec<DMatrix<f64>>> {
    let n = members.first()?.nrows();
    if members.len() != n {
        return None;
    }
    let mut first: Vec<Vec<f64>> = members
        .iter()
        .map(|m| m.row(0).iter().copied().collect())
        .collect();
    let mut mats: Vec<DMatrix<f64>> = members.to_vec();
    let scale = first.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let (best, size) = (col..n)
            .map(|r| (r, first[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if size < PIVOT_TOL * scale {
            return None;
        }
        first.swap(col, best);
        mats.swap(col, best);
        let p = first[col][col];
        first[col].iter_mut().for_each(|v| *v /= p);
        mats[col] /= p;
        for r in 0..n {
            if r != col {
                let f = first[r][col];
                if f != 0.0 {
                    let pivot_first = first[col].clone();
                    for (x, y) in first[r].iter_mut().zip(&pivot_first) {
                        *x -= f * y;
                    }
                    let pivot_row = mats[col].clone();
                    mats[r] -= pivot_row * f;
                }
            }
        }
    }
    Some(mats)
}

/// Null space of the symmetric intertwining system, pivot-normalized when
/// possible.
pub fn null_space(system: &IntertwinerSystem, rank_tol: f64) -> Result<OracleBasis> {
    let (null, singular_values) =
        svd_null_space(&system.matrix, rank_tol).map_err(|e| match e {
            Error::EigenNoConvergence { .. } => Error::EigenNoConvergence {
                lambda: system.lambda,
            },
            other => other,
        })?;
    let raw: Vec<DMatrix<f64>> = null
        .iter()
        .map(|v| system.to_matrix(v.as_slice()))
        .collect();
    let (members, normalization) = match pivot_normalize(&raw) {
        Some(m) => (m, Normalization::FirstRowPivot),
        None => (raw, Normalization::Orthonormal),
    };
    Ok(OracleBasis {
        n: system.n,
        lambda: system.lambda,
        members,
        normalization,
        singular_values,
    })
}

/// Null space over unconstrained `Θ`, returned as matrices.
pub fn general_null_space(h: &HamiltonianMatrix, rank_tol: f64) -> Result<Vec<DMatrix<f64>>> {
    let n = h.n();
    let (null, _) = svd_null_space(&assemble_general_system(h), rank_tol)?;
    Ok(null
        .iter()
        .map(|v| DMatrix::from_fn(n, n, |a, b| v[a * n + b]))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanComparison {
    /// Largest principal angle between the spans, radians.
    pub max_principal_angle: f64,
    /// Relative distance of each closed-form matrix to the oracle span.
    pub member_distances: Vec<f64>,
}

fn orthonormal_columns(mats: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows = mats[0].len();
    let stacked = DMatrix::from_fn(rows, mats.len(), |r, c| mats[c].as_slice()[r]);
    stacked.qr().q()
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().iter().fold(0.0_f64, |a, v| a.max(*v))
}

/// Principal angles between two families of matrices viewed as vectors in
/// `ℝ^{N²}`. The sine of the largest angle is measured directly as
/// `‖(I - Q₁Q₁ᵀ) Q₂‖₂`, which stays accurate for tiny angles.
pub fn compare_matrix_spans(
    left: &[DMatrix<f64>],
    right: &[DMatrix<f64>],
) -> Result<SpanComparison> {
    if left.len() != right.len() || left.is_empty() {
        return Err(Error::SpanMismatch {
            left: left.len(),
            right: right.len(),
        });
    }
    let size = left[0].len();
    if left.iter().chain(right).any(|m| m.len() != size) {
        return Err(Error::SpanMismatch {
            left: size,
            right: right[0].len(),
        });
    }
    let q1 = orthonormal_columns(left);
    let q2 = orthonormal_columns(right);
    let off12 = &q2 - &q1 * (q1.transpose() * &q2);
    let off21 = &q1 - &q2 * (q2.transpose() * &q1);
    let sine = spectral_norm(&off12).max(spectral_norm(&off21)).min(1.0);
    let member_distances = right
        .iter()
        .map(|m| {
            let v = DVector::from_column_slice(m.as_slice());
            let resid = &v - &q1 * (q1.transpose() * &v);
            resid.norm() / v.norm().max(f64::MIN_POSITIVE)
        })
        .collect();
    Ok(SpanComparison {
        max_principal_angle: sine.asin(),
        member_distances,
    })
}

pub fn compare_span(oracle: &OracleBasis, closed_forms: &[Pseudometric]) -> Result<SpanComparison> {
    if closed_forms.iter().any(|p| p.n() != oracle.n) {
        return Err(Error::SpanMismatch {
            left: oracle.n,
            right: closed_forms.first().map_or(0, Pseudometric::n),
        });
    }
    let right: Vec<DMatrix<f64>> = closed_forms.iter().map(|p| p.entries().clone()).collect();
    compare_matrix_spans(&oracle.members, &right)
}

/// `{ "n", "lambda", "nullity", "singular_values", "max_principal_angle", "members" }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n: usize,
    pub lambda: Option<f64>,
    pub nullity: usize,
    pub normalization: Normalization,
    pub singular_values: Vec<f64>,
    pub max_principal_angle: Option<f64>,
    pub members: Vec<Vec<Vec<f64>>>,
}

impl OracleReport {
    pub fn new(basis: &OracleBasis, comparison: Option<&SpanComparison>) -> Self {
        Self {
            n: basis.n,
            lambda: basis.lambda,
            nullity: basis.nullity(),
            normalization: basis.normalization,
            singular_values: basis.singular_values.clone(),
            max_principal_angle: comparison.map(|c| c.max_principal_angle),
            members: basis.members.iter().map(matrix::rows_of).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model;

    #[test]
    fn unknown_ordering() {
        let n = 4;
        let mut seen = Vec::new();
        for a in 0..n {
            for b in a..n {
                seen.push(unknown_index(n, a, b));
            }
        }
        assert_eq!(seen, (0..unknown_count(n)).collect::<Vec<_>>());
        assert_eq!(unknown_index(n, 3, 1), unknown_index(n, 1, 3));
    }

    #[test]
    fn three_site_items() {
        let lambda = 0.35;
        let sys = assemble_system(&model::build_two_center(3, lambda).unwrap());
        assert_eq!(sys.matrix.shape(), (9, 6));
        assert_eq!(sys.trivial_items(), vec![1, 5, 9]);
        // unknowns a, b, c, f, g, m; item 2 reads -f + fλ + a + aλ + c + cλ = 0
        let item2: Vec<f64> = sys.matrix.row(1).iter().copied().collect();
        let expected = [1.0 + lambda, 0.0, 1.0 + lambda, -1.0 + lambda, 0.0, 0.0];
        for (g, e) in item2.iter().zip(expected) {
            assert!((g - e).abs() < 1e-15);
        }
        // item 3: -g + gλ + b - bλ = 0
        let item3: Vec<f64> = sys.matrix.row(2).iter().copied().collect();
        let expected = [0.0, 1.0 - lambda, 0.0, 0.0, -1.0 + lambda, 0.0];
        for (g, e) in item3.iter().zip(expected) {
            assert!((g - e).abs() < 1e-15);
        }
    }

    #[test]
    fn four_site_trivial_items() {
        let sys = assemble_system(&model::build_two_center(4, 0.6).unwrap());
        assert_eq!(sys.trivial_items(), vec![1, 6, 11, 16]);
    }

    #[test]
    fn hermitian_limit_nullity() {
        let sys = assemble_system(&model::build_two_center(3, 0.0).unwrap());
        let basis = null_space(&sys, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(basis.nullity(), 3);
    }

    #[test]
    fn three_site_pivot_member() {
        let sys = assemble_system(&model::build_two_center(3, 0.5).unwrap());
        let basis = null_space(&sys, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(basis.nullity(), 3);
        assert!(basis.pivot_normalized());
        let m1 = &basis.members[0];
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0, 1.0]));
        assert!(matrix::max_abs(&(m1 - expected)) < 1e-12);
    }

    #[test]
    fn five_site_matches_general_solution() {
        // f = (c + a(1+λ))/(1-λ), g = (b+d)/(1-λ), h = (c + e(1+λ))/(1-λ), m = f + h - c(1+λ)
        let l = 0.45;
        let basis = null_space(
            &assemble_system(&model::build_two_center(5, l).unwrap()),
            DEFAULT_RANK_TOL,
        )
        .unwrap();
        assert_eq!(basis.nullity(), 5);
        let general = |p: [f64; 5]| {
            let [a, b, c, d, e] = p;
            let f = (c + a * (1.0 + l)) / (1.0 - l);
            let g = (b + d) / (1.0 - l);
            let h = (c + e * (1.0 + l)) / (1.0 - l);
            let m = f + h - c * (1.0 + l);
            #[rustfmt::skip]
            let rows = [
                a, b, c, d, e,
                b, f, g, h, d,
                c, g, m, g, c,
                d, h, g, f, b,
                e, d, c, b, a,
            ];
            DMatrix::from_row_slice(5, 5, &rows)
        };
        for j in 0..5 {
            let mut p = [0.0; 5];
            p[j] = 1.0;
            let diff = matrix::max_abs(&(&basis.members[j] - general(p)));
            assert!(diff < 1e-11, "member {} diff {diff}", j + 1);
        }
    }

    #[test]
    fn general_system_agrees_with_symmetric_ansatz() {
        for n in [3, 5, 7] {
            let h = model::build_two_center(n, -0.4).unwrap();
            let general = general_null_space(&h, DEFAULT_RANK_TOL).unwrap();
            let sym = null_space(&assemble_system(&h), DEFAULT_RANK_TOL).unwrap();
            assert_eq!(general.len(), n);
            let cmp = compare_matrix_spans(&general, &sym.members).unwrap();
            assert!(
                cmp.max_principal_angle < 1e-9,
                "{}",
                cmp.max_principal_angle
            );
        }
    }

    #[test]
    fn span_mismatch() {
        let a = vec![DMatrix::<f64>::identity(2, 2)];
        assert!(matches!(
            compare_matrix_spans(&a, &[]),
            Err(Error::SpanMismatch { left: 1, right: 0 })
        ));
    }

    #[test]
    fn identical_spans_have_zero_angle() {
        let a = vec![
            DMatrix::<f64>::identity(3, 3),
            DMatrix::from_element(3, 3, 1.0),
        ];
        let b = vec![&a[0] + &a[1], &a[0] - &a[1] * 2.0];
        let cmp = compare_matrix_spans(&a, &b).unwrap();
        assert!(cmp.max_principal_angle < 1e-14);
        assert!(cmp.member_distances.iter().all(|d| *d < 1e-14));
    }

    #[test]
    fn orthogonal_spans_have_right_angle() {
        let mut e1 = DMatrix::zeros(2, 2);
        e1[(0, 0)] = 1.0;
        let mut e2 = DMatrix::zeros(2, 2);
        e2[(1, 1)] = 1.0;
        let cmp = compare_matrix_spans(&[e1], &[e2]).unwrap();
        assert!((cmp.max_principal_angle - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn invalid_rank_tol() {
        let sys = assemble_system(&model::build_two_center(3, 0.5).unwrap());
        assert_eq!(
            null_space(&sys, 0.0).unwrap_err(),
            Error::InvalidTolerance(0.0)
        );
    }

    #[test]
    fn ambiguous_rank_reported() {
        let mut m = DMatrix::identity(3, 3);
        m[(2, 2)] = 2e-10;
        let sys = IntertwinerSystem {
            n: 2,
            lambda: None,
            matrix: m,
        };
        assert!(matches!(
            null_space(&sys, 1e-10),
            Err(Error::AmbiguousRank { .. })
        ));
    }

    #[test]
    fn report_json_keys() {
        let sys = assemble_system(&model::build_two_center(4, 0.2).unwrap());
        let basis = null_space(&sys, DEFAULT_RANK_TOL).unwrap();
        let json = serde_json::to_value(OracleReport::new(&basis, None)).unwrap();
        for key in [
            "n",
            "lambda",
            "nullity",
            "singular_values",
            "max_principal_angle",
            "members",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert_eq!(json["nullity"], 4);
    }
}
