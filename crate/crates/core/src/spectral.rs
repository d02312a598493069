//! Eigen- and singular-value functionals of symmetric matrices.
//!
//! Eigenvalues are always reported in descending order, `λ_1 ≥ … ≥ λ_n`, and
//! indices in the public API are 1-based where they name `λ_k` or `σ_k`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensembles::SymMatrix;

/// Singular values below `SINGULAR_CUTOFF · √n` are treated as zero.
pub const SINGULAR_CUTOFF: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("empty interval: a = {a} must be below b = {b}")]
    EmptyInterval { a: f64, b: f64 },
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("singular value profile contains an infinite entry")]
    InfiniteSingularValue,
    #[error("minor is singular (sigma_min = {sigma_min:e})")]
    SingularMinor { sigma_min: f64 },
    #[error("matrix must have dimension at least {min}, got {n}")]
    TooSmall { n: usize, min: usize },
}

/// Eigenvalues sorted descending with aligned orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit eigenvector of `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k).iter().copied().collect()
    }

    pub fn count_interval(&self, a: f64, b: f64) -> Result<usize, SpectralError> {
        count_interval(&self.eigenvalues, a, b)
    }

    pub fn gap(&self, k: usize, l: usize) -> Result<f64, SpectralError> {
        gap(&self.eigenvalues, k, l)
    }

    /// Index (0-based) of the eigenvalue of least modulus.
    pub fn least_singular_index(&self) -> usize {
        argmin_abs(&self.eigenvalues)
    }

    /// `max_k ‖A v_k − λ_k v_k‖₂`.
    pub fn max_residual(&self, a: &SymMatrix) -> f64 {
        let dense = a.to_dense();
        (0..self.n())
            .map(|k| {
                let v = self.eigenvectors.column(k);
                (&dense * v - v * self.eigenvalues[k]).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `‖VᵀV − I‖_max`.
    pub fn orthogonality_error(&self) -> f64 {
        let g = self.eigenvectors.transpose() * &self.eigenvectors;
        let n = self.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }

    pub fn singular_profile(&self) -> SingularProfile {
        SingularProfile::from_eigenvalues(&self.eigenvalues)
    }
}

fn argmin_abs(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if v.abs() < values[best].abs() {
            best = i;
        }
    }
    best
}

fn check_finite(a: &SymMatrix) -> Result<(), SpectralError> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(SpectralError::NonFinite)
    }
}

fn sort_descending(values: &mut [f64]) {
    values.sort_by(|x, y| y.total_cmp(x));
}

/// Full symmetric eigendecomposition.
pub fn eigen_sym(a: &SymMatrix) -> Result<Spectrum, SpectralError> {
    check_finite(a)?;
    let eig = a.to_dense().symmetric_eigen();
    let n = a.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, descending. Cheaper than [`eigen_sym`].
pub fn eigenvalues_sym(a: &SymMatrix) -> Result<Vec<f64>, SpectralError> {
    check_finite(a)?;
    let mut values: Vec<f64> = a.to_dense().symmetric_eigenvalues().iter().copied().collect();
    sort_descending(&mut values);
    Ok(values)
}

/// Singular values `σ_1 ≥ … ≥ σ_n` and their reciprocals `μ_k = 1/σ_{n−k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularProfile {
    pub sigmas: Vec<f64>,
    /// `f64::INFINITY` where the matching singular value is below the cutoff.
    pub mus: Vec<f64>,
}

impl SingularProfile {
    /// For symmetric input the singular values are the sorted moduli of the eigenvalues.
    pub fn from_eigenvalues(eigenvalues: &[f64]) -> Self {
        let mut sigmas: Vec<f64> = eigenvalues.iter().map(|x| x.abs()).collect();
        sort_descending(&mut sigmas);
        let n = sigmas.len();
        let cutoff = singular_cutoff(n);
        let mus = (1..=n)
            .map(|k| {
                let s = sigmas[n - k];
                if s < cutoff {
                    f64::INFINITY
                } else {
                    1.0 / s
                }
            })
            .collect();
        Self { sigmas, mus }
    }

    pub fn n(&self) -> usize {
        self.sigmas.len()
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigmas.last().copied().unwrap_or(0.0)
    }

    /// `σ_k`, 1-based.
    pub fn sigma(&self, k: usize) -> f64 {
        self.sigmas[k - 1]
    }

    /// `μ_k`, 1-based.
    pub fn mu(&self, k: usize) -> f64 {
        self.mus[k - 1]
    }

    pub fn is_singular(&self) -> bool {
        self.sigma_min() < singular_cutoff(self.n())
    }

    /// `‖A⁻¹‖_*`, computed from the singular values `μ_k` of `A⁻¹`.
    pub fn inverse_norm_star(&self) -> Result<f64, SpectralError> {
        norm_star(&self.mus)
    }
}

pub fn singular_cutoff(n: usize) -> f64 {
    SINGULAR_CUTOFF * (n as f64).sqrt()
}

pub fn singular_profile(a: &SymMatrix) -> Result<SingularProfile, SpectralError> {
    Ok(SingularProfile::from_eigenvalues(&eigenvalues_sym(a)?))
}

/// Least singular value `min_k |λ_k|`.
pub fn sigma_min(a: &SymMatrix) -> Result<f64, SpectralError> {
    Ok(eigenvalues_sym(a)?
        .iter()
        .map(|x| x.abs())
        .fold(f64::INFINITY, f64::min))
}

/// Number of eigenvalues in the open interval `(a, b)`.
pub fn count_interval(eigenvalues: &[f64], a: f64, b: f64) -> Result<usize, SpectralError> {
    if !(a < b) {
        return Err(SpectralError::EmptyInterval { a, b });
    }
    Ok(eigenvalues.iter().filter(|&&x| x > a && x < b).count())
}

/// `λ_k − λ_{k+ℓ}` for descending eigenvalues, `k` 1-based.
pub fn gap(eigenvalues: &[f64], k: usize, l: usize) -> Result<f64, SpectralError> {
    let n = eigenvalues.len();
    if k == 0 || k + l > n {
        return Err(SpectralError::IndexOutOfRange { index: k + l, n });
    }
    Ok(eigenvalues[k - 1] - eigenvalues[k + l - 1])
}

/// Smallest gap between consecutive eigenvalues.
pub fn min_gap(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .windows(2)
        .map(|w| (w[0] - w[1]).abs())
        .fold(f64::INFINITY, f64::min)
}

/// `(Σ_k σ_k² ln²(1+k))^{1/2}` with the singular values taken in descending order.
pub fn norm_star(sigmas: &[f64]) -> Result<f64, SpectralError> {
    if sigmas.iter().any(|s| !s.is_finite()) {
        return Err(SpectralError::InfiniteSingularValue);
    }
    let mut sorted: Vec<f64> = sigmas.iter().map(|s| s.abs()).collect();
    sort_descending(&mut sorted);
    let sum: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let w = ((i + 2) as f64).ln();
            s * s * w * w
        })
        .sum();
    Ok(sum.sqrt())
}

/// Euclidean distance from column `j` to the span of the remaining columns.
pub fn dist_to_colspan(a: &SymMatrix, j: usize) -> Result<f64, SpectralError> {
    let n = a.n();
    if j >= n {
        return Err(SpectralError::IndexOutOfRange { index: j, n });
    }
    check_finite(a)?;
    let x = DVector::from_vec(a.column(j));
    if n == 1 {
        return Ok(x.norm());
    }
    let others = DMatrix::from_fn(n, n - 1, |r, c| a.get(r, if c < j { c } else { c + 1 }));
    let svd = others.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let tol = smax * n as f64 * f64::EPSILON;
    let basis: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > tol)
        .collect();
    let mut r = x;
    // Two passes of projection removal keep the residual orthogonal to working precision.
    for _ in 0..2 {
        for &k in &basis {
            let q = u.column(k);
            let c = q.dot(&r);
            r -= q * c;
        }
    }
    Ok(r.norm())
}

/// Both sides of the distance identity for the first column of `A_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistIdentity {
    /// `d₁(A_{n+1})` by orthogonal projection.
    pub lhs: f64,
    /// `|⟨A_n⁻¹X, X⟩ − a₁₁| / √(1 + ‖A_n⁻¹X‖²)`.
    pub rhs: f64,
    pub abs_err: f64,
}

pub fn dist_identity_check(a: &SymMatrix) -> Result<DistIdentity, SpectralError> {
    let n1 = a.n();
    if n1 < 2 {
        return Err(SpectralError::TooSmall { n: n1, min: 2 });
    }
    check_finite(a)?;
    let minor = a.delete(0);
    let smin = sigma_min(&minor)?;
    if smin <= SINGULAR_CUTOFF {
        return Err(SpectralError::SingularMinor { sigma_min: smin });
    }
    let x = DVector::from_iterator(n1 - 1, (1..n1).map(|i| a.get(i, 0)));
    let y = minor
        .to_dense()
        .lu()
        .solve(&x)
        .ok_or(SpectralError::SingularMinor { sigma_min: smin })?;
    let rhs = (y.dot(&x) - a.get(0, 0)).abs() / (1.0 + y.norm_squared()).sqrt();
    let lhs = dist_to_colspan(a, 0)?;
    Ok(DistIdentity {
        lhs,
        rhs,
        abs_err: (lhs - rhs).abs(),
    })
}

/// Which eigenpairs enter [`perturbation_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSelection {
    All,
    /// Only the least-modulus eigenpair of `A` against that of `A^{(j)}`.
    LeastSingular,
}

/// Slack used by the inequality checks in this module.
pub const CHECK_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    /// Largest `|⟨v, X^{(j)}⟩| / (|λ − λ'| / |u_j|)`, with `0/0 = 0`.
    pub max_ratio: f64,
    pub pairs_checked: usize,
    /// Pairs dropped because `|u_j| < 1e-12`.
    pub pairs_skipped: usize,
    pub violations: usize,
}

/// Check `|⟨v, X^{(j)}⟩| ≤ |λ − λ'| / |u_j|` for eigenpairs `(λ, u)` of `A` and
/// `(λ', v)` of `A^{(j)}`, where `X^{(j)}` is column `j` with entry `j` removed.
pub fn perturbation_check(
    a: &SymMatrix,
    j: usize,
    selection: PairSelection,
) -> Result<PerturbationReport, SpectralError> {
    let n = a.n();
    if j >= n {
        return Err(SpectralError::IndexOutOfRange { index: j, n });
    }
    if n < 2 {
        return Err(SpectralError::TooSmall { n, min: 2 });
    }
    let full = eigen_sym(a)?;
    let minor = eigen_sym(&a.delete(j))?;
    let xj: Vec<f64> = (0..n).filter(|&i| i != j).map(|i| a.get(i, j)).collect();

    let (outer, inner): (Vec<usize>, Vec<usize>) = match selection {
        PairSelection::All => ((0..n).collect(), (0..n - 1).collect()),
        PairSelection::LeastSingular => (vec![full.least_singular_index()], vec![minor.least_singular_index()]),
    };
    let projections: Vec<f64> = inner
        .iter()
        .map(|&q| {
            minor
                .eigenvectors
                .column(q)
                .iter()
                .zip(&xj)
                .map(|(v, x)| v * x)
                .sum::<f64>()
                .abs()
        })
        .collect();

    let mut report = PerturbationReport {
        max_ratio: 0.0,
        pairs_checked: 0,
        pairs_skipped: 0,
        violations: 0,
    };
    for &p in &outer {
        let uj = full.eigenvectors[(j, p)].abs();
        if uj < 1e-12 {
            report.pairs_skipped += inner.len();
            continue;
        }
        for (idx, &q) in inner.iter().enumerate() {
            let lhs = projections[idx];
            let rhs = (full.eigenvalues[p] - minor.eigenvalues[q]).abs() / uj;
            let ratio = if rhs > 0.0 {
                lhs / rhs
            } else if lhs <= CHECK_SLACK {
                0.0
            } else {
                f64::INFINITY
            };
            report.max_ratio = report.max_ratio.max(ratio);
            if lhs > rhs * (1.0 + CHECK_SLACK) + CHECK_SLACK {
                report.violations += 1;
            }
            report.pairs_checked += 1;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaMinLowerReport {
    pub sigma_min: f64,
    /// `max_j |v_j| · d_j(A)` for the least singular unit vector `v`.
    pub max_bound: f64,
    pub holds: bool,
}

/// Check `σ_min(A) ≥ |v_j| · d_j(A)` for every column `j`.
pub fn sigma_min_lower_check(a: &SymMatrix) -> Result<SigmaMinLowerReport, SpectralError> {
    let spec = eigen_sym(a)?;
    let k = spec.least_singular_index();
    let smin = spec.eigenvalues[k].abs();
    let mut max_bound: f64 = 0.0;
    for j in 0..a.n() {
        let vj = spec.eigenvectors[(j, k)].abs();
        max_bound = max_bound.max(vj * dist_to_colspan(a, j)?);
    }
    Ok(SigmaMinLowerReport {
        sigma_min: smin,
        max_bound,
        holds: smin >= max_bound - CHECK_SLACK,
    })
}

/// Largest violation of Cauchy interlacing between `A` and `A^{(j)}`.
pub fn interlacing_violation(a: &SymMatrix, j: usize) -> Result<f64, SpectralError> {
    let outer = eigenvalues_sym(a)?;
    let inner = eigenvalues_sym(&a.delete(j))?;
    let mut worst: f64 = 0.0;
    for (i, &m) in inner.iter().enumerate() {
        worst = worst.max(m - outer[i]).max(outer[i + 1] - m);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_sym, Distribution};

    fn gram_schmidt_dist(a: &SymMatrix, j: usize) -> f64 {
        let n = a.n();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for c in (0..n).filter(|&c| c != j) {
            let mut w = a.column(c);
            for _ in 0..2 {
                for q in &basis {
                    let d: f64 = q.iter().zip(&w).map(|(x, y)| x * y).sum();
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= d * qi;
                    }
                }
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-10 {
                basis.push(w.iter().map(|x| x / norm).collect());
            }
        }
        let mut r = a.column(j);
        for _ in 0..2 {
            for q in &basis {
                let d: f64 = q.iter().zip(&r).map(|(x, y)| x * y).sum();
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= d * qi;
                }
            }
        }
        r.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn small_spectra() {
        let s = eigen_sym(&SymMatrix::identity(3)).unwrap();
        assert_eq!(s.eigenvalues.len(), 3);
        assert!(s.eigenvalues.iter().all(|x| (x - 1.0).abs() < 1e-14));
        let swap = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let s = eigen_sym(&swap).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-14);
        assert!((sigma_min(&swap).unwrap() - 1.0).abs() < 1e-14);
        assert!((sigma_min(&SymMatrix::diagonal(&[2.0, -3.0])).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn non_finite_is_rejected() {
        let mut a = SymMatrix::identity(2);
        a.set(0, 1, f64::NAN);
        assert_eq!(eigen_sym(&a).unwrap_err(), SpectralError::NonFinite);
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        let a = sample_sym(&Distribution::gaussian(), 5, 17).unwrap();
        let s = eigen_sym(&a).unwrap();
        let lambda = DMatrix::from_diagonal(&DVector::from_vec(s.eigenvalues.clone()));
        let rebuilt = &s.eigenvectors * lambda * s.eigenvectors.transpose();
        let err = (rebuilt - a.to_dense()).abs().max();
        assert!(err <= 1e-8, "{err}");
        assert!(s.orthogonality_error() <= 1e-9 * 5.0);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn singular_values_match_sorted_moduli() {
        let a = sample_sym(&Distribution::rademacher(), 12, 3).unwrap();
        let prof = singular_profile(&a).unwrap();
        let svd = a.to_dense().singular_values();
        let mut s: Vec<f64> = svd.iter().copied().collect();
        s.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in prof.sigmas.iter().zip(&s) {
            assert!((x - y).abs() <= 1e-8 * y.max(1.0));
        }
        assert!((prof.mu(1) - 1.0 / prof.sigma_min()).abs() < 1e-12 * prof.mu(1));
    }

    #[test]
    fn rank_deficient_matrix() {
        let a = SymMatrix::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![3.0, 6.0, 9.0],
        ]);
        assert!(sigma_min(&a).unwrap() <= 1e-10);
        let prof = singular_profile(&a).unwrap();
        assert!(prof.is_singular());
        assert_eq!(prof.mu(1), f64::INFINITY);
        assert_eq!(prof.inverse_norm_star(), Err(SpectralError::InfiniteSingularValue));
    }

    #[test]
    fn interval_counts() {
        let e = [2.0, 0.5, -1.0];
        assert_eq!(count_interval(&e, -1.5, 1.0).unwrap(), 2);
        assert_eq!(count_interval(&e, f64::NEG_INFINITY, f64::INFINITY).unwrap(), 3);
        assert_eq!(count_interval(&e, -1.0, 2.0).unwrap(), 1);
        assert!(count_interval(&e, 1.0, 1.0).is_err());
        let total = count_interval(&e, -3.0, 3.0).unwrap();
        assert_eq!(total, count_interval(&e, -3.0, 0.0).unwrap() + count_interval(&e, 0.0, 3.0).unwrap());
    }

    #[test]
    fn gaps() {
        let e = [3.0, 1.0, 0.0];
        assert_eq!(gap(&e, 1, 1).unwrap(), 2.0);
        assert_eq!(gap(&e, 1, 2).unwrap(), 3.0);
        assert_eq!(gap(&[1.0, 1.0], 1, 1).unwrap(), 0.0);
        assert!(gap(&e, 2, 2).is_err());
        assert!(gap(&e, 0, 1).is_err());
        assert_eq!(min_gap(&e), 1.0);
    }

    #[test]
    fn norm_star_values() {
        let expected = (2f64.ln().powi(2) + 3f64.ln().powi(2) + 4f64.ln().powi(2)).sqrt();
        assert!((norm_star(&[1.0, 1.0, 1.0]).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 1.8998).abs() < 1e-4);
        assert!((norm_star(&[2.5]).unwrap() - 2.5 * 2f64.ln()).abs() < 1e-15);
        let s = [3.0, 1.0, 0.5];
        let hs = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm_star(&s).unwrap() >= hs * 2f64.ln());
    }

    #[test]
    fn colspan_distances() {
        for j in 0..3 {
            assert!((dist_to_colspan(&SymMatrix::identity(3), j).unwrap() - 1.0).abs() < 1e-14);
        }
        let dup = SymMatrix::from_rows(&[
            vec![1.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ]);
        assert!(dist_to_colspan(&dup, 0).unwrap() < 1e-12);
        let a = sample_sym(&Distribution::gaussian(), 6, 8).unwrap();
        for j in 0..6 {
            let d = dist_to_colspan(&a, j).unwrap();
            assert!((d - gram_schmidt_dist(&a, j)).abs() < 1e-8);
        }
    }

    #[test]
    fn distance_identity() {
        let diag = SymMatrix::diagonal(&[-1.5, 2.0, 3.0]);
        let r = dist_identity_check(&diag).unwrap();
        assert!((r.lhs - 1.5).abs() < 1e-14 && (r.rhs - 1.5).abs() < 1e-14);
        let mut checked = 0;
        for seed in 0..50 {
            let a = sample_sym(&Distribution::rademacher(), 8, seed).unwrap();
            match dist_identity_check(&a) {
                Ok(r) => {
                    assert!(r.abs_err <= 1e-8, "seed {seed}: {r:?}");
                    checked += 1;
                }
                Err(SpectralError::SingularMinor { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
        assert!(checked > 30);
    }

    #[test]
    fn perturbation_two_by_two() {
        // Eigenpairs of [[0,1],[1,0]]: (1, (1,1)/√2), (−1, (1,−1)/√2). The minor is [0].
        let a = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let r = perturbation_check(&a, 1, PairSelection::All).unwrap();
        assert_eq!(r.pairs_checked, 2);
        // lhs = 1, rhs = 1/(1/√2) = √2 for both pairs
        assert!((r.max_ratio - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn perturbation_decoupled_coordinate() {
        let a = SymMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let r = perturbation_check(&a, 0, PairSelection::All).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        assert_eq!(r.violations, 0);
        assert!(r.pairs_skipped > 0);
    }

    #[test]
    fn perturbation_random() {
        for seed in 0..20 {
            let a = sample_sym(&Distribution::gaussian(), 3, seed).unwrap();
            for j in 0..3 {
                for sel in [PairSelection::All, PairSelection::LeastSingular] {
                    let r = perturbation_check(&a, j, sel).unwrap();
                    assert!(r.max_ratio <= 1.0 + 1e-8, "{r:?}");
                    assert_eq!(r.violations, 0);
                }
            }
        }
    }

    #[test]
    fn sigma_min_lower_bound() {
        assert!(sigma_min_lower_check(&SymMatrix::identity(4)).unwrap().holds);
        let dup = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let r = sigma_min_lower_check(&dup).unwrap();
        assert!(r.sigma_min < 1e-12 && r.max_bound < 1e-12 && r.holds);
        for seed in 0..100 {
            let a = sample_sym(&Distribution::rademacher(), 10, seed).unwrap();
            assert!(sigma_min_lower_check(&a).unwrap().holds);
        }
    }

    #[test]
    fn interlacing_holds() {
        let a = sample_sym(&Distribution::gaussian(), 9, 2).unwrap();
        for j in 0..9 {
            assert!(interlacing_violation(&a, j).unwrap() <= 1e-8);
        }
    }
}
