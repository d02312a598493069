//! Entry laws and samplers for every random object used by the studies:
//! symmetric matrices, columns, `μ`-random index sets, the symmetrized lazy
//! variables and the block-zeroed matrix `M`.
//!
//! All samplers are pure functions of `(parameters, seed, index)`. Matrix entry
//! `(i, j)` is drawn from its own counter stream keyed by `(seed, i, j)`, so the
//! leading `k × k` block of `sample_sym(dist, n, seed)` is `sample_sym(dist, k, seed)`
//! and any principal minor can be regenerated without the rest of the matrix.

use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{CounterRng, Domain};

/// Tolerance used when validating discrete laws.
pub const LAW_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("invalid entry law: {0}")]
    InvalidLaw(String),
    #[error("block size d = {d} must satisfy 1 <= d <= n/3 (n = {n})")]
    BlockSize { d: usize, n: usize },
    #[error("law has no finite atom table")]
    NotDiscrete,
    #[error("truncation window (1, {upper}) carries no mass of the symmetrized law")]
    EmptyWindow { upper: f64 },
}

fn check_prob(name: &'static str, value: f64, lo_open: bool, hi_open: bool) -> Result<(), EnsembleError> {
    let ok = value.is_finite()
        && if lo_open { value > 0.0 } else { value >= 0.0 }
        && if hi_open { value < 1.0 } else { value <= 1.0 };
    if ok {
        Ok(())
    } else {
        let range = match (lo_open, hi_open) {
            (true, true) => "(0, 1)",
            (true, false) => "(0, 1]",
            (false, true) => "[0, 1)",
            (false, false) => "[0, 1]",
        };
        Err(EnsembleError::OutOfRange { name, value, range })
    }
}

/// One point mass of a discrete law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

impl Atom {
    pub const fn new(value: f64, prob: f64) -> Self {
        Self { value, prob }
    }
}

/// The shape of an entry law. Every kind is normalized to mean 0 and variance 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntryLaw {
    /// Uniform on `{-1, 1}`.
    Rademacher,
    /// `±1/√ν` with probability `ν/2` each, `0` otherwise.
    LazySigned { nu: f64 },
    /// `±1/√p` with probability `p/2` each, `0` otherwise.
    SparseRademacher { p: f64 },
    /// Weights `[w₋, w₀, w₊]` on `{-1, 0, 1}`, rescaled to unit variance.
    UniformPm1Zero { weights: [f64; 3] },
    Gaussian,
    CustomDiscrete { atoms: Vec<Atom> },
}

fn default_proxy() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DistributionSpec {
    #[serde(flatten)]
    law: EntryLaw,
    #[serde(default = "default_proxy")]
    subgaussian_proxy: f64,
}

/// A validated subgaussian entry law with its subgaussian proxy `B`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DistributionSpec", into = "DistributionSpec")]
pub struct Distribution {
    law: EntryLaw,
    subgaussian_proxy: f64,
    atoms: Option<Vec<Atom>>,
    cumulative: Vec<f64>,
}

impl PartialEq for Distribution {
    fn eq(&self, other: &Self) -> bool {
        self.law == other.law && self.subgaussian_proxy == other.subgaussian_proxy
    }
}

impl TryFrom<DistributionSpec> for Distribution {
    type Error = EnsembleError;

    fn try_from(spec: DistributionSpec) -> Result<Self, Self::Error> {
        Distribution::new(spec.law)?.with_subgaussian_proxy(spec.subgaussian_proxy)
    }
}

impl From<Distribution> for DistributionSpec {
    fn from(d: Distribution) -> Self {
        DistributionSpec {
            law: d.law,
            subgaussian_proxy: d.subgaussian_proxy,
        }
    }
}

impl Distribution {
    pub fn new(law: EntryLaw) -> Result<Self, EnsembleError> {
        let atoms = match &law {
            EntryLaw::Rademacher => Some(vec![Atom::new(-1.0, 0.5), Atom::new(1.0, 0.5)]),
            EntryLaw::LazySigned { nu } => {
                check_prob("nu", *nu, true, false)?;
                Some(signed_sparse_atoms(*nu))
            }
            EntryLaw::SparseRademacher { p } => {
                check_prob("p", *p, true, false)?;
                Some(signed_sparse_atoms(*p))
            }
            EntryLaw::UniformPm1Zero { weights } => {
                let [wm, w0, wp] = *weights;
                for (name, w) in [("w_minus", wm), ("w_zero", w0), ("w_plus", wp)] {
                    check_prob(name, w, false, false)?;
                }
                if ((wm + w0 + wp) - 1.0).abs() > LAW_TOL {
                    return Err(EnsembleError::InvalidLaw("weights must sum to 1".into()));
                }
                if (wm - wp).abs() > LAW_TOL {
                    return Err(EnsembleError::InvalidLaw(
                        "weights on -1 and +1 must agree for mean 0".into(),
                    ));
                }
                if wm + wp <= 0.0 {
                    return Err(EnsembleError::InvalidLaw("law is a point mass at 0".into()));
                }
                let scale = 1.0 / (wm + wp).sqrt();
                Some(
                    [Atom::new(-scale, wm), Atom::new(0.0, w0), Atom::new(scale, wp)]
                        .into_iter()
                        .filter(|a| a.prob > 0.0)
                        .collect(),
                )
            }
            EntryLaw::Gaussian => None,
            EntryLaw::CustomDiscrete { atoms } => {
                validate_atoms(atoms)?;
                let mut a: Vec<Atom> = atoms.iter().copied().filter(|a| a.prob > 0.0).collect();
                a.sort_by(|x, y| x.value.total_cmp(&y.value));
                Some(a)
            }
        };
        if let Some(a) = &atoms {
            validate_atoms(a)?;
        }
        let cumulative = atoms
            .as_ref()
            .map(|a| {
                let mut acc = 0.0;
                a.iter()
                    .map(|x| {
                        acc += x.prob;
                        acc
                    })
                    .collect()
            })
            .unwrap_or_default();
        Ok(Self {
            law,
            subgaussian_proxy: 1.0,
            atoms,
            cumulative,
        })
    }

    pub fn rademacher() -> Self {
        Self::new(EntryLaw::Rademacher).expect("valid law")
    }

    pub fn gaussian() -> Self {
        Self::new(EntryLaw::Gaussian).expect("valid law")
    }

    pub fn lazy_signed(nu: f64) -> Result<Self, EnsembleError> {
        Self::new(EntryLaw::LazySigned { nu })
    }

    pub fn sparse_rademacher(p: f64) -> Result<Self, EnsembleError> {
        Self::new(EntryLaw::SparseRademacher { p })
    }

    pub fn uniform_pm1_zero(weights: [f64; 3]) -> Result<Self, EnsembleError> {
        Self::new(EntryLaw::UniformPm1Zero { weights })
    }

    pub fn custom_discrete(atoms: Vec<Atom>) -> Result<Self, EnsembleError> {
        Self::new(EntryLaw::CustomDiscrete { atoms })
    }

    pub fn with_subgaussian_proxy(mut self, b: f64) -> Result<Self, EnsembleError> {
        if !(b.is_finite() && b > 0.0) {
            return Err(EnsembleError::OutOfRange {
                name: "subgaussian_proxy",
                value: b,
                range: "(0, inf)",
            });
        }
        self.subgaussian_proxy = b;
        Ok(self)
    }

    pub fn law(&self) -> &EntryLaw {
        &self.law
    }

    pub fn subgaussian_proxy(&self) -> f64 {
        self.subgaussian_proxy
    }

    /// Exact atom table, `None` for continuous laws.
    pub fn atoms(&self) -> Option<&[Atom]> {
        self.atoms.as_deref()
    }

    pub fn is_discrete(&self) -> bool {
        self.atoms.is_some()
    }

    /// Largest absolute atom, `None` for unbounded laws.
    pub fn max_abs(&self) -> Option<f64> {
        self.atoms()
            .map(|a| a.iter().map(|x| x.value.abs()).fold(0.0, f64::max))
    }

    pub fn short_name(&self) -> String {
        match &self.law {
            EntryLaw::Rademacher => "rademacher".into(),
            EntryLaw::LazySigned { nu } => format!("lazy_signed({nu})"),
            EntryLaw::SparseRademacher { p } => format!("sparse_rademacher({p})"),
            EntryLaw::UniformPm1Zero { weights } => format!("uniform_pm1_0({:?})", weights),
            EntryLaw::Gaussian => "gaussian".into(),
            EntryLaw::CustomDiscrete { atoms } => format!("custom_discrete({} atoms)", atoms.len()),
        }
    }

    /// Draw one entry.
    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.law {
            EntryLaw::Rademacher => {
                if rng.next_u64() >> 63 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryLaw::Gaussian => StandardNormal.sample(rng),
            _ => {
                let atoms = self.atoms.as_ref().expect("discrete law");
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                let idx = self.cumulative.partition_point(|&c| c <= u);
                atoms[idx.min(atoms.len() - 1)].value
            }
        }
    }
}

fn signed_sparse_atoms(q: f64) -> Vec<Atom> {
    let v = 1.0 / q.sqrt();
    let mut atoms = vec![Atom::new(-v, q / 2.0)];
    if q < 1.0 {
        atoms.push(Atom::new(0.0, 1.0 - q));
    }
    atoms.push(Atom::new(v, q / 2.0));
    atoms
}

fn validate_atoms(atoms: &[Atom]) -> Result<(), EnsembleError> {
    if atoms.is_empty() {
        return Err(EnsembleError::InvalidLaw("empty atom table".into()));
    }
    if atoms
        .iter()
        .any(|a| !a.value.is_finite() || !a.prob.is_finite() || a.prob < 0.0)
    {
        return Err(EnsembleError::InvalidLaw("atoms must be finite with nonnegative mass".into()));
    }
    let (total, mean, second) = atom_moments(atoms);
    if (total - 1.0).abs() > LAW_TOL {
        return Err(EnsembleError::InvalidLaw(format!("probabilities sum to {total}")));
    }
    if mean.abs() > LAW_TOL {
        return Err(EnsembleError::InvalidLaw(format!("mean is {mean}, expected 0")));
    }
    if (second - 1.0).abs() > LAW_TOL {
        return Err(EnsembleError::InvalidLaw(format!("variance is {second}, expected 1")));
    }
    Ok(())
}

/// `(Σ p, Σ p v, Σ p v²)` of an atom table.
pub fn atom_moments(atoms: &[Atom]) -> (f64, f64, f64) {
    atoms.iter().fold((0.0, 0.0, 0.0), |(t, m, s), a| {
        (t + a.prob, m + a.prob * a.value, s + a.prob * a.value * a.value)
    })
}

/// Merge atoms whose values agree within `1e-12` (relative to scale) and sort.
pub fn merge_atoms(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if (last.value - a.value).abs() <= LAW_TOL * (1.0 + a.value.abs()) => {
                last.prob += a.prob;
            }
            _ => out.push(a),
        }
    }
    out.retain(|a| a.prob > 0.0);
    out
}

/// Atom table of `ζ̃ = ζ − ζ'`.
pub fn symmetrized_atoms(dist: &Distribution) -> Result<Vec<Atom>, EnsembleError> {
    let atoms = dist.atoms().ok_or(EnsembleError::NotDiscrete)?;
    let mut out = Vec::with_capacity(atoms.len() * atoms.len());
    for a in atoms {
        for b in atoms {
            out.push(Atom::new(a.value - b.value, a.prob * b.prob));
        }
    }
    Ok(merge_atoms(out))
}

/// Atom table of `ζ̃ · Z_ν` with `Z_ν ~ Bernoulli(ν)`.
pub fn lazy_symmetrized_atoms(dist: &Distribution, nu: f64) -> Result<Vec<Atom>, EnsembleError> {
    check_prob("nu", nu, false, false)?;
    let mut out: Vec<Atom> = symmetrized_atoms(dist)?
        .into_iter()
        .map(|a| Atom::new(a.value, a.prob * nu))
        .collect();
    out.push(Atom::new(0.0, 1.0 - nu));
    Ok(merge_atoms(out))
}

/// Laziness and truncation parameters for `ξ_ν = 1{|ζ̃| ∈ I_B} ζ̃ Z_ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LazyParams {
    pub nu: f64,
    /// `p = P(|ζ̃| ∈ I_B)`.
    pub p_truncation: f64,
    /// The open window `I_B = (1, 16 B²)`.
    pub window: (f64, f64),
}

impl LazyParams {
    /// Compute the truncation mass of `dist` for the window `(1, 16 B²)`.
    pub fn new(dist: &Distribution, nu: f64) -> Result<Self, EnsembleError> {
        check_prob("nu", nu, true, true)?;
        let b = dist.subgaussian_proxy();
        let window = (1.0, 16.0 * b * b);
        let p = match dist.atoms() {
            Some(_) => truncated_mass(&symmetrized_atoms(dist)?, window),
            // ζ̃ ~ N(0, 2), so P(|ζ̃| > a) = erfc(a / 2).
            None => libm::erfc(window.0 / 2.0) - libm::erfc(window.1 / 2.0),
        };
        let params = Self {
            nu,
            p_truncation: p,
            window,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        check_prob("nu", self.nu, true, true)?;
        if !(self.window.0 < self.window.1) {
            return Err(EnsembleError::InvalidLaw("empty truncation window".into()));
        }
        if !(self.p_truncation > 0.0 && self.p_truncation <= 1.0) {
            return Err(EnsembleError::EmptyWindow {
                upper: self.window.1,
            });
        }
        Ok(())
    }
}

fn in_window(x: f64, window: (f64, f64)) -> bool {
    let a = x.abs();
    a > window.0 && a < window.1
}

fn truncated_mass(sym: &[Atom], window: (f64, f64)) -> f64 {
    sym.iter()
        .filter(|a| in_window(a.value, window))
        .map(|a| a.prob)
        .sum()
}

/// Atom table of `ζ̄`, the symmetrized law conditioned on `|ζ̃| ∈ I_B`.
pub fn truncated_atoms(dist: &Distribution) -> Result<Vec<Atom>, EnsembleError> {
    let b = dist.subgaussian_proxy();
    let window = (1.0, 16.0 * b * b);
    let sym = symmetrized_atoms(dist)?;
    let p = truncated_mass(&sym, window);
    if p <= 0.0 {
        return Err(EnsembleError::EmptyWindow { upper: window.1 });
    }
    Ok(sym
        .into_iter()
        .filter(|a| in_window(a.value, window))
        .map(|a| Atom::new(a.value, a.prob / p))
        .collect())
}

/// Atom table of `ξ_ν`.
pub fn xi_atoms(dist: &Distribution, nu: f64) -> Result<Vec<Atom>, EnsembleError> {
    let lazy = LazyParams::new(dist, nu)?;
    let scale = nu * lazy.p_truncation;
    let mut out: Vec<Atom> = truncated_atoms(dist)?
        .into_iter()
        .map(|a| Atom::new(a.value, a.prob * scale))
        .collect();
    out.push(Atom::new(0.0, 1.0 - scale));
    Ok(merge_atoms(out))
}

/// Draw `ζ̃ Z_ν`.
pub fn sample_lazy_symmetrized<R: RngCore + ?Sized>(dist: &Distribution, nu: f64, rng: &mut R) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    if u >= nu {
        return 0.0;
    }
    dist.sample(rng) - dist.sample(rng)
}

/// Draw `ξ_ν`.
pub fn sample_xi<R: RngCore + ?Sized>(dist: &Distribution, lazy: &LazyParams, rng: &mut R) -> f64 {
    let x = sample_lazy_symmetrized(dist, lazy.nu, rng);
    if in_window(x, lazy.window) {
        x
    } else {
        0.0
    }
}

/// Draw one entry from the stream behind `rng`.
#[inline]
pub fn sample_entry<R: RngCore + ?Sized>(dist: &Distribution, rng: &mut R) -> f64 {
    dist.sample(rng)
}

/// Dense symmetric matrix stored as its packed upper triangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            upper: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Build from `f(i, j)` evaluated for `i <= j` only.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                upper.push(f(i, j));
            }
        }
        Self { n, upper }
    }

    /// Takes the upper triangle of a square row-major array.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        Self::from_upper_fn(n, |i, j| rows[i][j])
    }

    /// Takes the upper triangle of a square matrix.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        Self::from_upper_fn(m.nrows(), |i, j| m[(i, j)])
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + j
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.offset(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.offset(i, j);
        self.upper[k] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.upper.iter().all(|x| x.is_finite())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn principal_minor(&self, indices: &[usize]) -> Self {
        Self::from_upper_fn(indices.len(), |a, b| self.get(indices[a], indices[b]))
    }

    /// The minor `A^{(j)}`: row and column `j` deleted.
    pub fn delete(&self, j: usize) -> Self {
        let keep: Vec<usize> = (0..self.n).filter(|&i| i != j).collect();
        self.principal_minor(&keep)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            upper: self.upper.iter().map(|x| x * s).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for (j, xj) in x.iter().enumerate() {
                acc += self.get(i, j) * xj;
            }
            y[i] = acc;
        }
        y
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                let x = self.get(i, j);
                s += if i == j { x * x } else { 2.0 * x * x };
            }
        }
        s.sqrt()
    }
}

/// Wigner matrix with i.i.d. entries on and above the diagonal.
pub fn sample_sym(dist: &Distribution, n: usize, seed: u64) -> Result<SymMatrix, EnsembleError> {
    if n == 0 {
        return Err(EnsembleError::ZeroDimension);
    }
    Ok(SymMatrix::from_upper_fn(n, |i, j| {
        sym_entry(dist, seed, i, j)
    }))
}

/// Principal submatrix of the infinite seeded matrix on global `indices`.
pub fn sample_sym_on(dist: &Distribution, indices: &[usize], seed: u64) -> Result<SymMatrix, EnsembleError> {
    if indices.is_empty() {
        return Err(EnsembleError::ZeroDimension);
    }
    Ok(SymMatrix::from_upper_fn(indices.len(), |a, b| {
        let (i, j) = (indices[a], indices[b]);
        sym_entry(dist, seed, i.min(j), i.max(j))
    }))
}

#[inline]
fn sym_entry(dist: &Distribution, seed: u64, i: usize, j: usize) -> f64 {
    let mut rng = CounterRng::new(seed, Domain::SymEntry, i as u64, j as u64);
    dist.sample(&mut rng)
}

/// Column vector with i.i.d. coordinates.
pub fn sample_col(dist: &Distribution, n: usize, seed: u64) -> Result<Vec<f64>, EnsembleError> {
    if n == 0 {
        return Err(EnsembleError::ZeroDimension);
    }
    Ok(sample_col_in(dist, n, seed, Domain::Column))
}

fn sample_col_in(dist: &Distribution, n: usize, seed: u64, domain: Domain) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let mut rng = CounterRng::new(seed, domain, j as u64, 0);
            dist.sample(&mut rng)
        })
        .collect()
}

/// Include each index of `0..n` independently with probability `mu`.
pub fn sample_mu_subset(n: usize, mu: f64, seed: u64) -> Result<Vec<usize>, EnsembleError> {
    check_prob("mu", mu, false, false)?;
    Ok((0..n)
        .filter(|&j| CounterRng::new(seed, Domain::Subset, j as u64, 0).uniform() < mu)
        .collect())
}

/// `X̃ = X_J − X'_J` for a `μ`-random subset `J`.
pub fn sample_tilde_x(dist: &Distribution, n: usize, mu: f64, seed: u64) -> Result<Vec<f64>, EnsembleError> {
    if n == 0 {
        return Err(EnsembleError::ZeroDimension);
    }
    let subset = sample_mu_subset(n, mu, seed)?;
    let x = sample_col_in(dist, n, seed, Domain::Column);
    let xp = sample_col_in(dist, n, seed, Domain::ColumnPrime);
    let mut out = vec![0.0; n];
    for j in subset {
        out[j] = x[j] - xp[j];
    }
    Ok(out)
}

/// `ν`-lazy vector in `{-1, 0, 1}^d` with `P(X_i = ±1) = ν/2`. Not rescaled.
pub fn sample_lazy_pm1(d: usize, nu: f64, seed: u64) -> Result<Vec<f64>, EnsembleError> {
    check_prob("nu", nu, false, false)?;
    Ok((0..d)
        .map(|j| {
            let u = CounterRng::new(seed, Domain::Lazy, j as u64, 0).uniform();
            if u < nu / 2.0 {
                -1.0
            } else if u < nu {
                1.0
            } else {
                0.0
            }
        })
        .collect())
}

/// Parameters of the block-zeroed matrix `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroedMatrixParams {
    pub n: usize,
    pub d: usize,
    pub nu: f64,
    pub base: Distribution,
}

impl ZeroedMatrixParams {
    pub fn new(n: usize, d: usize, nu: f64, base: Distribution) -> Result<Self, EnsembleError> {
        let p = Self { n, d, nu, base };
        p.validate()?;
        Ok(p)
    }

    /// Block size from the `d = c₀² n` convention, clamped into `[1, n/3]`.
    pub fn from_c0(n: usize, c0: f64, nu: f64, base: Distribution) -> Result<Self, EnsembleError> {
        let d = ((c0 * c0 * n as f64).round() as usize).clamp(1, (n / 3).max(1));
        Self::new(n, d, nu, base)
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.n == 0 {
            return Err(EnsembleError::ZeroDimension);
        }
        if self.d == 0 || 3 * self.d > self.n {
            return Err(EnsembleError::BlockSize { d: self.d, n: self.n });
        }
        check_prob("nu", self.nu, false, false)
    }
}

/// Sample `M` with zero blocks on `[d]×[d]` and `[d+1,n]²` and i.i.d. `ζ̃ Z_ν`
/// entries in the off-diagonal block `H₁`.
pub fn sample_zeroed(params: &ZeroedMatrixParams, seed: u64) -> Result<SymMatrix, EnsembleError> {
    params.validate()?;
    let mut m = SymMatrix::zeros(params.n);
    for i in params.d..params.n {
        for j in 0..params.d {
            m.set(j, i, zeroed_entry(params, seed, i, j));
        }
    }
    Ok(m)
}

/// Entry `(i, j)` of the `H₁` block (`i ≥ d > j`), addressed like [`sample_zeroed`].
#[inline]
pub fn zeroed_entry(params: &ZeroedMatrixParams, seed: u64, i: usize, j: usize) -> f64 {
    let mut rng = CounterRng::new(seed, Domain::Zeroed, i as u64, j as u64);
    sample_lazy_symmetrized(&params.base, params.nu, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct FixedBits(u64);

    impl RngCore for FixedBits {
        fn next_u32(&mut self) -> u32 {
            (self.0 >> 32) as u32
        }
        fn next_u64(&mut self) -> u64 {
            self.0
        }
        fn fill_bytes(&mut self, dest: &mut [u8]) {
            dest.fill(0)
        }
        fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
            dest.fill(0);
            Ok(())
        }
    }

    #[test]
    fn rademacher_follows_forcing_bit() {
        let d = Distribution::rademacher();
        assert_eq!(sample_entry(&d, &mut FixedBits(0)), -1.0);
        assert_eq!(sample_entry(&d, &mut FixedBits(1 << 63)), 1.0);
    }

    #[test]
    fn lazy_signed_quarter_has_unit_variance() {
        let d = Distribution::lazy_signed(0.25).unwrap();
        let atoms = d.atoms().unwrap();
        assert_eq!(atoms.len(), 3);
        assert_eq!(atoms[1], Atom::new(0.0, 0.75));
        assert!((atoms[2].value - 2.0).abs() < 1e-15);
        assert!((atoms[2].prob - 0.125).abs() < 1e-15);
        let (t, m, v) = atom_moments(atoms);
        assert!((t - 1.0).abs() < 1e-12 && m.abs() < 1e-12 && (v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn every_builtin_discrete_law_is_normalized() {
        let laws = [
            Distribution::rademacher(),
            Distribution::lazy_signed(0.1).unwrap(),
            Distribution::lazy_signed(1.0).unwrap(),
            Distribution::sparse_rademacher(0.3).unwrap(),
            Distribution::uniform_pm1_zero([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap(),
        ];
        for d in &laws {
            let (t, m, v) = atom_moments(d.atoms().unwrap());
            assert!((t - 1.0).abs() < LAW_TOL, "{}", d.short_name());
            assert!(m.abs() < LAW_TOL);
            assert!((v - 1.0).abs() < LAW_TOL);
        }
    }

    #[test]
    fn custom_law_rejects_bad_moments() {
        let bad = Distribution::custom_discrete(vec![Atom::new(-1.0, 0.5), Atom::new(2.0, 0.5)]);
        assert!(bad.is_err());
        let unnormalized = Distribution::custom_discrete(vec![Atom::new(-1.0, 0.4), Atom::new(1.0, 0.4)]);
        assert!(unnormalized.is_err());
        let ok = Distribution::custom_discrete(vec![
            Atom::new(-2.0, 0.125),
            Atom::new(0.0, 0.75),
            Atom::new(2.0, 0.125),
        ]);
        assert!(ok.is_ok());
        assert!(Distribution::uniform_pm1_zero([0.2, 0.5, 0.3]).is_err());
    }

    #[test]
    fn gaussian_sample_mean_is_small() {
        let d = Distribution::gaussian();
        let mut rng = CounterRng::new(11, Domain::Auxiliary, 0, 0);
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn sym_rejects_zero_and_is_deterministic() {
        let d = Distribution::rademacher();
        assert_eq!(sample_sym(&d, 0, 1), Err(EnsembleError::ZeroDimension));
        let a = sample_sym(&d, 1, 5).unwrap();
        assert!(a.get(0, 0).abs() == 1.0);
        assert_eq!(sample_sym(&d, 9, 42).unwrap(), sample_sym(&d, 9, 42).unwrap());
        assert_ne!(sample_sym(&d, 9, 42).unwrap(), sample_sym(&d, 9, 43).unwrap());
    }

    #[test]
    fn minors_are_consistent_with_addressing() {
        let d = Distribution::gaussian();
        let a = sample_sym(&d, 8, 3).unwrap();
        let idx: Vec<usize> = (1..8).collect();
        assert_eq!(a.principal_minor(&idx), sample_sym_on(&d, &idx, 3).unwrap());
        let lead = sample_sym(&d, 5, 3).unwrap();
        assert_eq!(a.principal_minor(&[0, 1, 2, 3, 4]), lead);
        assert_eq!(a.delete(0), sample_sym_on(&d, &idx, 3).unwrap());
    }

    #[test]
    fn off_diagonal_entry_variance() {
        let d = Distribution::gaussian();
        let n = 100_000;
        let mut s = 0.0;
        let mut s2 = 0.0;
        for seed in 0..n {
            let x = sample_sym(&d, 3, seed).unwrap().get(0, 1);
            s += x;
            s2 += x * x;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        // sd of the sample variance at 1e5 draws is ~0.0045
        assert!((0.985..1.015).contains(&var), "var {var}");
    }

    #[test]
    fn column_sampling() {
        let d = Distribution::rademacher();
        assert!(sample_col(&d, 0, 1).is_err());
        let x = sample_col(&d, 1, 9).unwrap();
        assert!(x[0] == 1.0 || x[0] == -1.0);
        assert_eq!(sample_col(&d, 50, 9).unwrap(), sample_col(&d, 50, 9).unwrap());
        let big = sample_col(&Distribution::gaussian(), 200_000, 4).unwrap();
        let mean = big.iter().sum::<f64>() / big.len() as f64;
        assert!(mean.abs() < 0.01);
    }

    #[test]
    fn mu_subset_edges_and_density() {
        assert!(sample_mu_subset(100, 0.0, 1).unwrap().is_empty());
        assert_eq!(sample_mu_subset(100, 1.0, 1).unwrap().len(), 100);
        let j = sample_mu_subset(10_000, 0.3, 7).unwrap();
        let frac = j.len() as f64 / 10_000.0;
        assert!((0.27..0.33).contains(&frac), "frac {frac}");
        assert!(sample_mu_subset(10, 1.5, 1).is_err());
    }

    #[test]
    fn tilde_x_support_and_variance() {
        let d = Distribution::rademacher();
        assert!(sample_tilde_x(&d, 20, 0.0, 3).unwrap().iter().all(|&x| x == 0.0));
        let mu = 0.4;
        let trials = 100_000u64;
        let mut s2 = 0.0;
        let (mut above, mut below) = (0u64, 0u64);
        for seed in 0..trials {
            let x = sample_tilde_x(&d, 3, mu, seed).unwrap();
            for &v in &x {
                assert!(v == 0.0 || v == 2.0 || v == -2.0);
            }
            s2 += x[0] * x[0];
            if x[0] > 1.0 {
                above += 1;
            } else if x[0] < -1.0 {
                below += 1;
            }
        }
        let var = s2 / trials as f64;
        assert!((var - 2.0 * mu).abs() < 0.03 * 2.0 * mu, "var {var}");
        // symmetric law: the two tails differ by O(sqrt(trials)) only
        let diff = (above as f64 - below as f64).abs();
        assert!(diff < 4.0 * ((above + below) as f64).sqrt(), "{above} vs {below}");
    }

    #[test]
    fn zeroed_matrix_structure() {
        let base = Distribution::rademacher();
        assert!(ZeroedMatrixParams::new(6, 3, 0.5, base.clone()).is_err());
        assert!(ZeroedMatrixParams::new(6, 0, 0.5, base.clone()).is_err());
        let zero = ZeroedMatrixParams::new(9, 3, 0.0, base.clone()).unwrap();
        assert!(sample_zeroed(&zero, 1).unwrap().frobenius() == 0.0);

        let p = ZeroedMatrixParams::new(6, 2, 0.9, base).unwrap();
        let mut seen = [[false; 6]; 6];
        for seed in 0..500 {
            let m = sample_zeroed(&p, seed).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    let in_zero_block = (i < 2 && j < 2) || (i >= 2 && j >= 2);
                    if in_zero_block {
                        assert_eq!(m.get(i, j), 0.0);
                    }
                    if m.get(i, j) != 0.0 {
                        seen[i][j] = true;
                    }
                }
            }
        }
        let mut upper_nonzero = 0;
        for (i, row) in seen.iter().enumerate() {
            for (j, &s) in row.iter().enumerate() {
                if s && i < j {
                    upper_nonzero += 1;
                }
            }
        }
        assert_eq!(upper_nonzero, 8);
    }

    #[test]
    fn lazy_params_for_rademacher() {
        let d = Distribution::rademacher();
        let lp = LazyParams::new(&d, 0.25).unwrap();
        // ζ̃ ∈ {−2, 0, 2} w.p. (1/4, 1/2, 1/4); window (1, 16) keeps ±2
        assert!((lp.p_truncation - 0.5).abs() < 1e-15);
        assert_eq!(lp.window, (1.0, 16.0));
        let bar = truncated_atoms(&d).unwrap();
        assert_eq!(bar, vec![Atom::new(-2.0, 0.5), Atom::new(2.0, 0.5)]);
        let xi = xi_atoms(&d, 0.25).unwrap();
        let (t, m, _) = atom_moments(&xi);
        assert!((t - 1.0).abs() < 1e-12 && m.abs() < 1e-12);
        assert!(LazyParams::new(&d, 0.0).is_err());
        let g = LazyParams::new(&Distribution::gaussian(), 0.25).unwrap();
        assert!(g.p_truncation > 0.4 && g.p_truncation < 0.8);
    }

    #[test]
    fn lazy_pm1_vector() {
        let x = sample_lazy_pm1(100_000, 0.25, 5).unwrap();
        let zeros = x.iter().filter(|&&v| v == 0.0).count() as f64 / x.len() as f64;
        assert!((zeros - 0.75).abs() < 0.01);
        assert!(x.iter().all(|&v| v == 0.0 || v.abs() == 1.0));
    }

    #[test]
    fn distribution_serde_roundtrip() {
        let d = Distribution::lazy_signed(0.25).unwrap().with_subgaussian_proxy(2.0).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"kind":"lazy_signed","nu":0.25,"subgaussian_proxy":2.0}"#);
        let back: Distribution = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.atoms(), d.atoms());
        let bad: Result<Distribution, _> = serde_json::from_str(r#"{"kind":"lazy_signed","nu":2.0}"#);
        assert!(bad.is_err());
    }
}
