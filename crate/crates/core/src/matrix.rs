//! Small dense-matrix helpers.

use nalgebra::DMatrix;

use crate::scalar::Entry;

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn is_symmetric<T: Entry>(m: &DMatrix<T>) -> bool {
    let n = m.nrows();
    m.ncols() == n && (0..n).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]))
}

/// Symmetric about the main antidiagonal: `A[m][n] = A[N-1-n][N-1-m]` (0-based).
pub fn is_persymmetric<T: Entry>(m: &DMatrix<T>) -> bool {
    let n = m.nrows();
    m.ncols() == n && (0..n).all(|i| (0..n).all(|j| m[(i, j)] == m[(n - 1 - j, n - 1 - i)]))
}

/// Every entry with `|i - j| > 1` is exactly zero.
pub fn is_tridiagonal<T: Entry>(m: &DMatrix<T>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..m.ncols()).all(|j| i.abs_diff(j) <= 1 || m[(i, j)].is_zero()))
}

/// `Aᵀ B - B A`, the left-hand side of the intertwining relation.
pub fn commutator_transposed<T: Entry>(h: &DMatrix<T>, p: &DMatrix<T>) -> DMatrix<T> {
    let n = h.nrows();
    DMatrix::from_fn(n, n, |j, l| {
        let mut acc = T::zero();
        for i in 0..n {
            acc =
                acc + h[(i, j)].clone() * p[(i, l)].clone() - p[(j, i)].clone() * h[(i, l)].clone();
        }
        acc
    })
}

pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return None;
    }
    Some(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let line: Vec<String> = m.row(i).iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
