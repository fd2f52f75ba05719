//! Spectra of the real non-symmetric Hamiltonians.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::fmt_f64;
use crate::model::{self, HamiltonianMatrix};

/// Relative threshold on `|Im E|` below which an eigenvalue counts as real.
pub const DEFAULT_REALITY_TOL: f64 = 1e-9;

/// Relative gap below which a spectrum is flagged degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;

const SCHUR_MAX_ITER: usize = 10_000;

/// Eigenvalues of one matrix with reality and degeneracy classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub n: usize,
    pub lambda: Option<f64>,
    /// Sorted by real part, ties by imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub all_real: bool,
    /// Smallest distance between two eigenvalues classified real.
    pub min_gap: Option<f64>,
    pub num_complex: usize,
    /// `max |E|`.
    pub scale: f64,
}

impl SpectrumReport {
    fn classify(
        n: usize,
        lambda: Option<f64>,
        mut eigenvalues: Vec<Complex64>,
        reality_tol: f64,
    ) -> Self {
        sort_spectrum(&mut eigenvalues);
        let scale = eigenvalues.iter().fold(0.0_f64, |m, e| m.max(e.norm()));
        let cut = reality_tol * scale.max(1.0);
        let real: Vec<f64> = eigenvalues
            .iter()
            .filter(|e| e.im.abs() <= cut)
            .map(|e| e.re)
            .collect();
        let num_complex = eigenvalues.len() - real.len();
        let min_gap = real
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .reduce(f64::min);
        Self {
            n,
            lambda,
            eigenvalues,
            all_real: num_complex == 0,
            min_gap,
            num_complex,
            scale,
        }
    }

    /// True when two real eigenvalues are closer than `DEGENERACY_TOL · scale`.
    pub fn is_degenerate(&self) -> bool {
        self.min_gap
            .is_some_and(|g| g < DEGENERACY_TOL * self.scale.max(1.0))
    }

    /// Groups eigenvalues whose mutual complex distance chains below `tol`.
    pub fn clusters(&self, tol: f64) -> Vec<Vec<Complex64>> {
        let n = self.eigenvalues.len();
        let mut label: Vec<usize> = (0..n).collect();
        fn root(label: &mut [usize], mut i: usize) -> usize {
            while label[i] != i {
                label[i] = label[label[i]];
                i = label[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                if (self.eigenvalues[i] - self.eigenvalues[j]).norm() < tol {
                    let (a, b) = (root(&mut label, i), root(&mut label, j));
                    label[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: Vec<Vec<Complex64>> = Vec::new();
        let mut index_of = vec![usize::MAX; n];
        for i in 0..n {
            let r = root(&mut label, i);
            if index_of[r] == usize::MAX {
                index_of[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[index_of[r]].push(self.eigenvalues[i]);
        }
        groups
    }
}

/// Real parts closer than this (relative to `max(1, max|E|)`) count as tied.
const SORT_TIE_TOL: f64 = 1e-9;

/// Orders by real part, then by imaginary part among eigenvalues whose real
/// parts agree to rounding. Conjugate pairs sharing a real part therefore
/// come out as `(re - i·im, re + i·im)` regardless of last-bit noise.
pub fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let scale = values.iter().fold(1.0_f64, |m, e| m.max(e.norm()));
    let tol = SORT_TIE_TOL * scale;
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end].re - values[start].re <= tol {
            end += 1;
        }
        values[start..end].sort_by(|a, b| a.im.total_cmp(&b.im));
        start = end;
    }
}

/// Largest distance in a nearest-neighbour matching of two equally long
/// eigenvalue lists; `INFINITY` when the lengths differ.
pub fn spectral_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0_f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("lengths are equal");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Diagonal similarity scaling by powers of two so that row and column norms
/// are comparable. Returns the scaled matrix.
pub fn balance(mut a: DMatrix<f64>) -> DMatrix<f64> {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
    a
}

/// Dense orthogonal similarity `Q A Q` with a fixed Householder reflector.
/// It changes the first column of the Hessenberg reduction, which gets the
/// real Schur iteration out of cycles it cannot leave on its own.
fn reflect(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let v = DVector::from_fn(n, |i, _| 1.0 + 0.618 * i as f64);
    let v = &v / v.norm();
    let q = DMatrix::identity(n, n) - &v * v.transpose() * 2.0;
    &q * a * &q
}

/// Eigenvalues of a general real square matrix (balanced real Schur form).
///
/// The double-shift iteration has no exceptional shifts and stalls on some
/// structured inputs, for instance three sites at `|λ| > 1`, where the
/// spectrum is `{2, 2 ± iy}`. When that happens the unbalanced matrix and
/// then a reflected copy are tried.
pub fn general_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("eigenvalue input"));
    }
    let balanced = balance(m.clone());
    let attempts = [balanced.clone(), m.clone(), reflect(&balanced)];
    for a in attempts {
        if let Some(schur) = Schur::try_new(a, f64::EPSILON, SCHUR_MAX_ITER) {
            let mut values: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
            sort_spectrum(&mut values);
            return Ok(values);
        }
    }
    Err(Error::EigenNoConvergence { lambda: None })
}

/// Eigenvalues, taking the symmetric solver when `m` is exactly symmetric.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if crate::matrix::is_symmetric(m) {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("eigenvalue input"));
        }
        Ok(symmetric_eigenvalues(m)
            .into_iter()
            .map(|e| Complex64::new(e, 0.0))
            .collect())
    } else {
        general_eigenvalues(m)
    }
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn compute_spectrum(h: &HamiltonianMatrix, reality_tol: f64) -> Result<SpectrumReport> {
    if !(reality_tol.is_finite() && reality_tol > 0.0) {
        return Err(Error::InvalidTolerance(reality_tol));
    }
    let values = eigenvalues(h.entries()).map_err(|e| match e {
        Error::EigenNoConvergence { .. } => Error::EigenNoConvergence { lambda: h.lambda() },
        other => other,
    })?;
    Ok(SpectrumReport::classify(
        h.n(),
        h.lambda(),
        values,
        reality_tol,
    ))
}

fn csqrt(x: f64) -> Complex64 {
    if x >= 0.0 {
        Complex64::new(x.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-x).sqrt())
    }
}

/// Known closed-form energies for `n ∈ {3, 4, 5, 7, 9}`, sorted.
pub fn closed_form_energies(n: usize, lambda: f64) -> Result<Vec<Complex64>> {
    let l2 = lambda * lambda;
    let l4 = l2 * l2;
    let two = Complex64::new(2.0, 0.0);
    let pm = |centre: Complex64, r: Complex64| [centre - r, centre + r];
    let mut out: Vec<Complex64> = match n {
        3 => {
            let mut v = vec![two];
            v.extend(pm(two, csqrt(2.0 - 2.0 * l2)));
            v
        }
        4 => {
            let r = csqrt(5.0 - 4.0 * l2) * 0.5;
            let mut v = pm(Complex64::new(1.5, 0.0), r).to_vec();
            v.extend(pm(Complex64::new(2.5, 0.0), r));
            v
        }
        5 => {
            let mut v = vec![two];
            v.extend(pm(two, csqrt(1.0 - l2)));
            v.extend(pm(two, csqrt(3.0 - l2)));
            v
        }
        7 => {
            let inner = (8.0 + l4).sqrt();
            let mut v = vec![two];
            v.extend(pm(two, csqrt(8.0 - 2.0 * l2 - 2.0 * inner) * 0.5));
            v.extend(pm(two, csqrt(2.0 - l2)));
            v.extend(pm(two, csqrt(8.0 - 2.0 * l2 + 2.0 * inner) * 0.5));
            v
        }
        9 => {
            let minus = (l4 - 2.0 * l2 + 5.0).sqrt();
            let plus = (l4 + 2.0 * l2 + 5.0).sqrt();
            let mut v = vec![two];
            v.extend(pm(two, csqrt(6.0 - 2.0 * l2 - 2.0 * minus) * 0.5));
            v.extend(pm(two, csqrt(10.0 - 2.0 * l2 - 2.0 * plus) * 0.5));
            v.extend(pm(two, csqrt(6.0 - 2.0 * l2 + 2.0 * minus) * 0.5));
            v.extend(pm(two, csqrt(10.0 - 2.0 * l2 + 2.0 * plus) * 0.5));
            v
        }
        _ => return Err(Error::UnsupportedDimension(n)),
    };
    sort_spectrum(&mut out);
    Ok(out)
}

/// One grid point of a λ-sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub eigenvalues: Vec<Complex64>,
    pub num_complex: usize,
    pub all_real: bool,
    pub min_gap: Option<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub n: usize,
    pub lambda_grid: Vec<f64>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// `lambda,re_e1,im_e1,...,re_eN,im_eN,num_complex`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda");
        for i in 1..=self.n {
            out.push_str(&format!(",re_e{i},im_e{i}"));
        }
        out.push_str(",num_complex\n");
        for row in &self.rows {
            out.push_str(&fmt_f64(row.lambda));
            for e in &row.eigenvalues {
                out.push(',');
                out.push_str(&fmt_f64(e.re));
                out.push(',');
                out.push_str(&fmt_f64(e.im));
            }
            out.push_str(&format!(",{}\n", row.num_complex));
        }
        out
    }
}

/// Uniform grid including both endpoints.
pub fn uniform_grid(lambda_min: f64, lambda_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::InvalidSteps(steps));
    }
    if !(lambda_min.is_finite() && lambda_max.is_finite() && lambda_min < lambda_max) {
        return Err(Error::InvalidRange {
            min: lambda_min,
            max: lambda_max,
        });
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                lambda_max
            } else {
                lambda_min + (lambda_max - lambda_min) * (i as f64 / last)
            }
        })
        .collect())
}

/// Two-center spectrum at every grid point; rows are in grid order.
pub fn sweep(
    n: usize,
    lambda_min: f64,
    lambda_max: f64,
    steps: usize,
    reality_tol: f64,
) -> Result<SweepTable> {
    if n < 3 {
        return Err(Error::DimensionTooSmall { n, min: 3 });
    }
    let grid = uniform_grid(lambda_min, lambda_max, steps)?;
    let rows = grid
        .par_iter()
        .map(|&lambda| {
            let report = compute_spectrum(&model::build_two_center(n, lambda)?, reality_tol)?;
            Ok(SweepRow {
                lambda,
                degenerate: report.is_degenerate(),
                eigenvalues: report.eigenvalues,
                num_complex: report.num_complex,
                all_real: report.all_real,
                min_gap: report.min_gap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        n,
        lambda_grid: grid,
        rows,
    })
}

/// Number of non-real eigenvalues at a coupling outside `[-1, 1]`.
pub fn count_fragile(n: usize, lambda_outside: f64) -> Result<usize> {
    if n < 4 {
        return Err(Error::DimensionTooSmall { n, min: 4 });
    }
    if lambda_outside
        .abs()
        .partial_cmp(&1.0)
        .is_none_or(|o| o.is_le())
    {
        return Err(Error::NotOutsideInterval(lambda_outside));
    }
    let h = model::build_two_center(n, lambda_outside)?;
    Ok(compute_spectrum(&h, DEFAULT_REALITY_TOL)?.num_complex)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(values: &[Complex64]) -> Vec<f64> {
        values.iter().map(|e| e.re).collect()
    }

    #[test]
    fn sort_ties_real_parts_within_rounding() {
        let mut v = vec![
            Complex64::new(2.0 + 4e-16, 0.7),
            Complex64::new(2.0, -0.9),
            Complex64::new(2.0 - 4e-16, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(2.0 + 8e-16, -0.7),
        ];
        sort_spectrum(&mut v);
        let im: Vec<f64> = v.iter().map(|e| e.im).collect();
        assert_eq!(im, vec![0.0, -0.9, -0.7, 0.0, 0.7]);
    }

    #[test]
    fn three_site_outside_interval_converges() {
        for lambda in [-1.5899997, -1.616974706185444, 2.8800003, 3.7050003] {
            let h = model::build_two_center(3, lambda).unwrap();
            let got = general_eigenvalues(h.entries()).unwrap();
            let want = closed_form_energies(3, lambda).unwrap();
            assert!(spectral_distance(&got, &want) < 1e-12, "λ = {lambda}");
        }
    }

    #[test]
    fn three_site_spectrum() {
        let h = model::build_two_center(3, 0.5).unwrap();
        let r = compute_spectrum(&h, DEFAULT_REALITY_TOL).unwrap();
        let s = 1.5_f64.sqrt();
        let expected = [2.0 - s, 2.0, 2.0 + s];
        assert!(r.all_real);
        assert_eq!(r.num_complex, 0);
        for (got, want) in re(&r.eigenvalues).iter().zip(expected) {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
        assert!((expected[0] - 0.7752551).abs() < 1e-7);
    }

    #[test]
    fn four_site_hermitian_spectrum() {
        let h = model::build_two_center(4, 0.0).unwrap();
        let r = compute_spectrum(&h, DEFAULT_REALITY_TOL).unwrap();
        let s5 = 5.0_f64.sqrt() / 2.0;
        let expected = [1.5 - s5, 2.5 - s5, 1.5 + s5, 2.5 + s5];
        for (got, want) in re(&r.eigenvalues).iter().zip(expected) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn triple_confluence_at_boundary() {
        let h = model::build_two_center(3, 1.0).unwrap();
        let r = compute_spectrum(&h, DEFAULT_REALITY_TOL).unwrap();
        for e in &r.eigenvalues {
            assert!((e - Complex64::new(2.0, 0.0)).norm() < 1e-7, "{e}");
        }
        let clusters = r.clusters(1e-6);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].len(), 3);
        if r.all_real {
            assert!(r.min_gap.unwrap() < 1e-6);
            assert!(r.is_degenerate());
        }
    }

    #[test]
    fn closed_forms_at_hermitian_point() {
        let e5 = closed_form_energies(5, 0.0).unwrap();
        let s3 = 3.0_f64.sqrt();
        for (got, want) in re(&e5).iter().zip([2.0 - s3, 1.0, 2.0, 3.0, 2.0 + s3]) {
            assert!((got - want).abs() < 1e-15);
        }
        let e7 = closed_form_energies(7, 0.0).unwrap();
        let s2 = 2.0_f64.sqrt();
        assert!(e7.iter().any(|e| (e.re - (2.0 - s2)).abs() < 1e-15));
        assert!(e7.iter().any(|e| (e.re - (2.0 + s2)).abs() < 1e-15));
    }

    #[test]
    fn nine_site_boundary_degeneracy() {
        let e9 = closed_form_energies(9, 1.0).unwrap();
        // E_{±1} = 2 ± ½√(6 - 2 - 2·2) = 2
        let at_two = e9.iter().filter(|e| (e.re - 2.0).abs() < 1e-12).count();
        assert_eq!(at_two, 3);
        let numeric = compute_spectrum(&model::build_two_center(9, 1.0).unwrap(), 1e-9).unwrap();
        assert!(spectral_distance(&numeric.eigenvalues, &e9) < 1e-6);
    }

    #[test]
    fn unsupported_closed_form() {
        assert_eq!(
            closed_form_energies(6, 0.2).unwrap_err(),
            Error::UnsupportedDimension(6)
        );
    }

    #[test]
    fn symmetric_fast_path_agrees() {
        for n in 3..30 {
            let h = model::build_two_center(n, 0.0).unwrap();
            let general = general_eigenvalues(h.entries()).unwrap();
            let sym = symmetric_eigenvalues(h.entries());
            for (g, s) in general.iter().zip(&sym) {
                assert!((g.re - s).abs() <= 1e-12 && g.im == 0.0, "n={n}");
            }
        }
    }

    #[test]
    fn balancing_preserves_spectrum() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 1e6, 0.0, 1e-6, 2.0, 1e4, 0.0, 1e-4, 3.0]);
        let b = balance(m.clone());
        let tr: f64 = (0..3).map(|i| m[(i, i)]).sum();
        let trb: f64 = (0..3).map(|i| b[(i, i)]).sum();
        assert_eq!(tr, trb);
        assert!(crate::matrix::max_abs(&b) < 1e3);
    }

    #[test]
    fn sweep_reality_window_n4() {
        let t = sweep(4, -2.0, 2.0, 401, DEFAULT_REALITY_TOL).unwrap();
        assert_eq!(t.rows.len(), 401);
        let edge = 5.0_f64.sqrt() / 2.0;
        for row in &t.rows {
            if row.lambda.abs() < edge - 1e-9 {
                assert_eq!(row.num_complex, 0, "λ = {}", row.lambda);
            } else if row.lambda.abs() > edge + 1e-9 {
                assert!(row.num_complex > 0, "λ = {}", row.lambda);
            }
        }
        assert_eq!(t.lambda_grid[0], -2.0);
        assert_eq!(*t.lambda_grid.last().unwrap(), 2.0);
    }

    #[test]
    fn sweep_six_sites_real() {
        let t = sweep(6, -0.99, 0.99, 99, DEFAULT_REALITY_TOL).unwrap();
        assert!(t.rows.iter().all(|r| r.all_real));
    }

    #[test]
    fn sweep_validates() {
        assert_eq!(
            sweep(4, 1.5, 1.5, 2, DEFAULT_REALITY_TOL).unwrap_err(),
            Error::InvalidRange { min: 1.5, max: 1.5 }
        );
        assert_eq!(
            sweep(4, 0.0, 1.0, 1, DEFAULT_REALITY_TOL).unwrap_err(),
            Error::InvalidSteps(1)
        );
        assert!(matches!(
            sweep(2, 0.0, 1.0, 3, DEFAULT_REALITY_TOL),
            Err(Error::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn sweep_csv_shape() {
        let csv = sweep(3, -0.5, 0.5, 3, DEFAULT_REALITY_TOL)
            .unwrap()
            .to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "lambda,re_e1,im_e1,re_e2,im_e2,re_e3,im_e3,num_complex"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 8);
        assert_eq!(row[0], "-5.0000000000000000e-1");
        assert_eq!(row[7], "0");
    }

    #[test]
    fn fragile_examples() {
        // only E_{±1} = 2 ± √(1-λ²) leave the real axis; 3 - λ² > 0 keeps E_{±2} real
        assert_eq!(count_fragile(5, 1.5).unwrap(), 2);
        assert_eq!(count_fragile(5, 2.0).unwrap(), 4);
        assert_eq!(count_fragile(9, 1.5).unwrap(), 4);
        assert_eq!(count_fragile(4, 1.2).unwrap(), 4);
        assert_eq!(
            count_fragile(5, 0.5).unwrap_err(),
            Error::NotOutsideInterval(0.5)
        );
    }

    #[test]
    fn bad_tolerance() {
        let h = model::build_two_center(3, 0.0).unwrap();
        assert!(matches!(
            compute_spectrum(&h, 0.0),
            Err(Error::InvalidTolerance(_))
        ));
    }

    #[test]
    fn spectral_distance_matches_permuted() {
        let a = [
            Complex64::new(1.0, 1.0),
            Complex64::new(1.0, -1.0),
            Complex64::new(3.0, 0.0),
        ];
        let b = [a[2], a[0], a[1]];
        assert_eq!(spectral_distance(&a, &b), 0.0);
        assert_eq!(spectral_distance(&a, &b[..2]), f64::INFINITY);
    }
}
