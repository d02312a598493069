//! Small-ball probabilities, characteristic functions and the Fourier-side
//! inequalities behind them.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::ensembles::{
    lazy_symmetrized_atoms, merge_atoms, sample_col, truncated_atoms, xi_atoms, zeroed_entry, Atom,
    Distribution, EnsembleError, LazyParams, SymMatrix, ZeroedMatrixParams,
};
use crate::rng::{trial_seed, CounterRng, Domain};
use crate::stats::{is_sorted_ascending, wilson};

/// Minimum sample count accepted by [`levy_scalar`].
pub const MIN_LEVY_SAMPLES: usize = 1000;

/// Largest dimension accepted by [`decoupling_check`].
pub const MAX_DECOUPLING_DIM: usize = 14;

/// Largest atom table built when convolving a linear form exactly.
const MAX_CONVOLUTION_ATOMS: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmallBallError {
    #[error("no samples")]
    Empty,
    #[error("{got} samples given, at least {min} required")]
    TooFewSamples { got: usize, min: usize },
    #[error("samples must be sorted ascending")]
    Unsorted,
    #[error("radius must be a finite nonnegative number, got {0}")]
    BadRadius(f64),
    #[error("law is not discrete; use the Monte Carlo evaluator")]
    NotDiscrete,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("exact enumeration over dimension {0} is too large")]
    TooLarge(usize),
    #[error("index set is not a subset of [n] without repeats")]
    BadPartition,
    #[error("invalid threshold parameters: {0}")]
    BadThresholdParams(String),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

/// Where the small-ball window is centered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowCenter {
    At(f64),
    /// Supremum over all centers.
    Swept,
}

/// A probability estimate with its 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationEstimate {
    pub p_hat: f64,
    pub hits: u64,
    pub trials: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub window_center: WindowCenter,
}

impl ConcentrationEstimate {
    pub fn from_counts(hits: u64, trials: u64, window_center: WindowCenter) -> Self {
        assert!(trials > 0 && hits <= trials);
        let (ci_low, ci_high) = wilson(hits, trials);
        Self {
            p_hat: hits as f64 / trials as f64,
            hits,
            trials,
            ci_low,
            ci_high,
            window_center,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

fn check_radius(eps: f64) -> Result<(), SmallBallError> {
    if eps.is_finite() && eps >= 0.0 {
        Ok(())
    } else {
        Err(SmallBallError::BadRadius(eps))
    }
}

/// Largest number of sorted samples inside a closed window of width `2ε`.
fn max_window_count(sorted: &[f64], eps: f64) -> usize {
    let width = 2.0 * eps;
    let mut best = 0;
    let mut hi = 0;
    for lo in 0..sorted.len() {
        if hi < lo {
            hi = lo;
        }
        while hi < sorted.len() && sorted[hi] - sorted[lo] <= width {
            hi += 1;
        }
        best = best.max(hi - lo);
    }
    best
}

/// `sup_w P(|Y − w| ≤ ε)` for the empirical measure of sorted scalar samples.
pub fn levy_scalar(sorted: &[f64], eps: f64) -> Result<ConcentrationEstimate, SmallBallError> {
    check_radius(eps)?;
    if sorted.is_empty() {
        return Err(SmallBallError::Empty);
    }
    if sorted.len() < MIN_LEVY_SAMPLES {
        return Err(SmallBallError::TooFewSamples {
            got: sorted.len(),
            min: MIN_LEVY_SAMPLES,
        });
    }
    if !is_sorted_ascending(sorted) {
        return Err(SmallBallError::Unsorted);
    }
    let hits = max_window_count(sorted, eps) as u64;
    Ok(ConcentrationEstimate::from_counts(
        hits,
        sorted.len() as u64,
        WindowCenter::Swept,
    ))
}

/// Small-ball estimates for `⟨X, v⟩`: window at zero and swept over centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallBallEstimate {
    pub centered: ConcentrationEstimate,
    pub swept: ConcentrationEstimate,
}

/// Draw `⟨X, v⟩` for `trials` independent columns, in trial order.
pub fn linear_form_samples(
    v: &[f64],
    dist: &Distribution,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>, SmallBallError> {
    if v.is_empty() {
        return Err(SmallBallError::Dimension { expected: 1, got: 0 });
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let x = sample_col(dist, v.len(), trial_seed(seed, t as u64))?;
            Ok(x.iter().zip(v).map(|(a, b)| a * b).sum())
        })
        .collect()
}

pub fn small_ball(
    v: &[f64],
    dist: &Distribution,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<SmallBallEstimate, SmallBallError> {
    check_radius(eps)?;
    let mut z = linear_form_samples(v, dist, trials, seed)?;
    let hits = z.iter().filter(|x| x.abs() <= eps).count() as u64;
    z.sort_by(f64::total_cmp);
    let swept = levy_scalar(&z, eps)?;
    Ok(SmallBallEstimate {
        centered: ConcentrationEstimate::from_counts(hits, trials as u64, WindowCenter::At(0.0)),
        swept,
    })
}

/// Exact law of `⟨X, v⟩` for a discrete entry law.
pub fn linear_form_atoms(dist: &Distribution, v: &[f64]) -> Result<Vec<Atom>, SmallBallError> {
    let base = dist.atoms().ok_or(SmallBallError::NotDiscrete)?;
    let mut law = vec![Atom::new(0.0, 1.0)];
    for &c in v {
        let mut next = Vec::with_capacity(law.len() * base.len());
        for a in &law {
            for b in base {
                next.push(Atom::new(a.value + c * b.value, a.prob * b.prob));
            }
        }
        law = merge_atoms(next);
        if law.len() > MAX_CONVOLUTION_ATOMS {
            return Err(SmallBallError::TooLarge(v.len()));
        }
    }
    Ok(law)
}

/// `sup_w P(|Z − w| ≤ ε)` for an exact atom table.
pub fn levy_atoms(atoms: &[Atom], eps: f64) -> f64 {
    let mut sorted = atoms.to_vec();
    sorted.sort_by(|a, b| a.value.total_cmp(&b.value));
    let width = 2.0 * eps * (1.0 + 1e-12);
    let mut best: f64 = 0.0;
    let mut hi = 0;
    let mut mass = 0.0;
    for lo in 0..sorted.len() {
        if hi < lo {
            hi = lo;
            mass = 0.0;
        }
        while hi < sorted.len() && sorted[hi].value - sorted[lo].value <= width {
            mass += sorted[hi].prob;
            hi += 1;
        }
        best = best.max(mass);
        mass -= sorted[lo].prob;
    }
    best.min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharFnForm {
    ExactDiscrete,
    MonteCarlo { trials: usize },
}

/// `θ ↦ E e^{2πiθZ}` for `Z = Σ_k c_k ζ_k` with i.i.d. `ζ_k` drawn from an atom table.
#[derive(Debug, Clone)]
pub struct CharFn {
    pub form: CharFnForm,
    atoms: Vec<Atom>,
    coefficients: Vec<f64>,
}

impl CharFn {
    pub fn from_atoms(atoms: Vec<Atom>) -> Self {
        Self {
            form: CharFnForm::ExactDiscrete,
            atoms,
            coefficients: vec![1.0],
        }
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for &c in &self.coefficients {
            let mut s = Complex64::new(0.0, 0.0);
            for a in &self.atoms {
                s += Complex64::from_polar(a.prob, 2.0 * PI * theta * c * a.value);
            }
            acc *= s;
        }
        acc
    }

    /// Real part; exact for symmetric laws.
    pub fn eval_real(&self, theta: f64) -> f64 {
        self.eval(theta).re
    }

    pub fn abs(&self, theta: f64) -> f64 {
        self.eval(theta).norm()
    }
}

/// Exact characteristic function of a discrete entry law.
pub fn charfn_exact(dist: &Distribution) -> Result<CharFn, SmallBallError> {
    Ok(CharFn::from_atoms(
        dist.atoms().ok_or(SmallBallError::NotDiscrete)?.to_vec(),
    ))
}

/// Exact characteristic function of `⟨X, v⟩`.
pub fn charfn_linear_form(dist: &Distribution, v: &[f64]) -> Result<CharFn, SmallBallError> {
    Ok(CharFn {
        form: CharFnForm::ExactDiscrete,
        atoms: dist.atoms().ok_or(SmallBallError::NotDiscrete)?.to_vec(),
        coefficients: v.to_vec(),
    })
}

/// `1 − ν + ν E cos(2πtζ̃)`, the characteristic function of `ζ̃ Z_ν`.
pub fn charfn_lazy_symmetrized(dist: &Distribution, nu: f64) -> Result<CharFn, SmallBallError> {
    Ok(CharFn::from_atoms(lazy_symmetrized_atoms(dist, nu)?))
}

/// `1 − νp + νp E cos(2πtζ̄)`, the characteristic function of `ξ_ν`.
pub fn charfn_xi(dist: &Distribution, nu: f64) -> Result<CharFn, SmallBallError> {
    Ok(CharFn::from_atoms(xi_atoms(dist, nu)?))
}

/// Empirical characteristic function of `trials` draws.
pub fn charfn_monte_carlo(dist: &Distribution, trials: usize, seed: u64) -> CharFn {
    let mut rng = CounterRng::new(seed, Domain::Auxiliary, 0, 0);
    let w = 1.0 / trials as f64;
    let atoms = (0..trials).map(|_| Atom::new(dist.sample(&mut rng), w)).collect();
    CharFn {
        form: CharFnForm::MonteCarlo { trials },
        atoms,
        coefficients: vec![1.0],
    }
}

#[inline]
fn torus1(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Signed violations of the two-sided bound on `φ_{ξ_ν}` over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiBoundsReport {
    pub points: usize,
    /// Largest of `lower − φ`, `φ − upper` and `φ_{ζ̃Z_ν} − φ_{ξ_ν}` over the grid.
    pub max_violation: f64,
    pub lower_violations: usize,
    pub upper_violations: usize,
    /// Points where `φ_{ζ̃Z_ν} > φ_{ξ_ν}`.
    pub domination_violations: usize,
}

/// Tolerance for the exact Fourier inequality checks.
pub const FOURIER_SLACK: f64 = 1e-9;

/// Check `exp(−32νp E‖tζ̄‖²) ≤ φ_{ξ_ν}(t) ≤ exp(−νp E‖tζ̄‖²)` and
/// `φ_{ζ̃Z_ν}(t) ≤ φ_{ξ_ν}(t)` at every grid point.
///
/// The lower bound relies on `1 − 20x ≥ e^{−32x}`, which only holds for small
/// `x`, so it can fail once `νp` is large.
pub fn xi_bounds_check(dist: &Distribution, nu: f64, t_grid: &[f64]) -> Result<XiBoundsReport, SmallBallError> {
    let lazy = LazyParams::new(dist, nu)?;
    let bar = truncated_atoms(dist)?;
    let xi = charfn_xi(dist, nu)?;
    let lazy_cf = charfn_lazy_symmetrized(dist, nu)?;
    let np = nu * lazy.p_truncation;
    let mut report = XiBoundsReport {
        points: t_grid.len(),
        max_violation: f64::NEG_INFINITY,
        lower_violations: 0,
        upper_violations: 0,
        domination_violations: 0,
    };
    for &t in t_grid {
        let phi = xi.eval_real(t);
        let e_torus: f64 = bar.iter().map(|a| a.prob * torus1(t * a.value).powi(2)).sum();
        let lower = (-32.0 * np * e_torus).exp();
        let upper = (-np * e_torus).exp();
        let lo_v = lower - phi;
        let up_v = phi - upper;
        let dom_v = lazy_cf.eval_real(t) - phi;
        report.lower_violations += usize::from(lo_v > FOURIER_SLACK);
        report.upper_violations += usize::from(up_v > FOURIER_SLACK);
        report.domination_violations += usize::from(dom_v > FOURIER_SLACK);
        report.max_violation = report.max_violation.max(lo_v).max(up_v).max(dom_v);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosineBoundsReport {
    pub points: usize,
    pub max_violation: f64,
    pub violations: usize,
}

/// Check `1 − 20‖a‖² ≤ cos(2πa) ≤ 1 − ‖a‖²` at every grid point.
pub fn cosine_bounds_check(a_grid: &[f64]) -> CosineBoundsReport {
    let mut report = CosineBoundsReport {
        points: a_grid.len(),
        max_violation: f64::NEG_INFINITY,
        violations: 0,
    };
    for &a in a_grid {
        let d2 = torus1(a).powi(2);
        let c = (2.0 * PI * a).cos();
        let v = (1.0 - 20.0 * d2 - c).max(c - (1.0 - d2));
        report.violations += usize::from(v > FOURIER_SLACK);
        report.max_violation = report.max_violation.max(v);
    }
    report
}

/// Composite Simpson rule on `[a, b]` with an even number of panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels + panels % 2;
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsseenCheck {
    /// `sup_t P(|Z − t| ≤ δ)`, exact.
    pub lhs: f64,
    /// `∫_{−1/δ}^{1/δ} |φ_Z(θ)| dθ` on the refined panel count.
    pub integral: f64,
    /// `δ · integral`.
    pub rhs: f64,
    pub ratio: f64,
    /// Relative change of the integral between `panels` and `2 · panels`.
    pub richardson_rel: f64,
}

/// Compare the small-ball probability of `Z = ⟨X, v⟩` with `δ ∫ |φ_Z|`.
pub fn esseen_bound_check(
    dist: &Distribution,
    v: &[f64],
    delta: f64,
    panels: usize,
) -> Result<EsseenCheck, SmallBallError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(SmallBallError::BadRadius(delta));
    }
    let lhs = levy_atoms(&linear_form_atoms(dist, v)?, delta);
    let cf = charfn_linear_form(dist, v)?;
    let f = |theta: f64| cf.abs(theta);
    // |φ_Z| is even, so integrate over [0, 1/δ] and double.
    let coarse = 2.0 * simpson(f, 0.0, 1.0 / delta, panels);
    let fine = 2.0 * simpson(f, 0.0, 1.0 / delta, 2 * panels);
    let rhs = delta * fine;
    Ok(EsseenCheck {
        lhs,
        integral: fine,
        rhs,
        ratio: lhs / rhs,
        richardson_rel: (fine - coarse).abs() / fine.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecouplingCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl DecouplingCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + FOURIER_SLACK
    }
}

/// Visit every assignment of atoms to `dims` coordinates with its probability.
fn for_each_state(atoms: &[Atom], dims: usize, mut f: impl FnMut(&[f64], f64)) {
    let k = atoms.len();
    let mut idx = vec![0usize; dims];
    let mut x: Vec<f64> = vec![atoms[0].value; dims];
    loop {
        let p: f64 = idx.iter().map(|&i| atoms[i].prob).product();
        f(&x, p);
        let mut pos = 0;
        loop {
            if pos == dims {
                return;
            }
            idx[pos] += 1;
            if idx[pos] < k {
                x[pos] = atoms[idx[pos]].value;
                break;
            }
            idx[pos] = 0;
            x[pos] = atoms[0].value;
            pos += 1;
        }
    }
}

/// Evaluate both sides of the tilted decoupling inequality by exhaustive enumeration.
///
/// `j_set` is `J`; its complement in `[n]` is `I`.
pub fn decoupling_check(
    dist: &Distribution,
    m: &SymMatrix,
    u: &[f64],
    theta: f64,
    j_set: &[usize],
) -> Result<DecouplingCheck, SmallBallError> {
    let atoms = dist.atoms().ok_or(SmallBallError::NotDiscrete)?;
    let n = m.n();
    if n > MAX_DECOUPLING_DIM {
        return Err(SmallBallError::TooLarge(n));
    }
    if u.len() != n {
        return Err(SmallBallError::Dimension { expected: n, got: u.len() });
    }
    let mut in_j = vec![false; n];
    for &j in j_set {
        if j >= n || in_j[j] {
            return Err(SmallBallError::BadPartition);
        }
        in_j[j] = true;
    }
    let jj: Vec<usize> = (0..n).filter(|&i| in_j[i]).collect();
    let ii: Vec<usize> = (0..n).filter(|&i| !in_j[i]).collect();

    let mut total = Complex64::new(0.0, 0.0);
    for_each_state(atoms, n, |x, p| {
        let mx = m.mul_vec(x);
        let q: f64 = mx.iter().zip(x).map(|(a, b)| a * b).sum();
        let tilt: f64 = x.iter().zip(u).map(|(a, b)| a * b).sum();
        total += Complex64::from_polar(p * tilt.exp(), 2.0 * PI * theta * q);
    });
    let lhs = total.norm_sqr();

    let mut rhs = 0.0;
    for_each_state(atoms, jj.len(), |xj, pj| {
        for_each_state(atoms, jj.len(), |xpj, ppj| {
            let tilt: f64 = jj
                .iter()
                .enumerate()
                .map(|(k, &c)| (xj[k] + xpj[k]) * u[c])
                .sum();
            // w = M (X − X')_J restricted to I
            let w: Vec<f64> = ii
                .iter()
                .map(|&r| jj.iter().enumerate().map(|(k, &c)| m.get(r, c) * (xj[k] - xpj[k])).sum())
                .collect();
            let mut inner = Complex64::new(0.0, 0.0);
            for_each_state(atoms, ii.len(), |xi, pi| {
                let phase: f64 = w.iter().zip(xi).map(|(a, b)| a * b).sum();
                let t2: f64 = ii.iter().enumerate().map(|(k, &r)| xi[k] * u[r]).sum();
                inner += Complex64::from_polar(pi * (2.0 * t2).exp(), 4.0 * PI * theta * phase);
            });
            rhs += pj * ppj * tilt.exp() * inner.norm();
        });
    });
    Ok(DecouplingCheck { lhs, rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosineProductCheck {
    /// `∏_j E|cos(2πξa_j)|`.
    pub lhs: f64,
    /// `exp(−c min_r ‖ra‖_T²)` with the minimum taken over a grid in `[1, 1/c]`.
    pub rhs: f64,
}

impl CosineProductCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + FOURIER_SLACK
    }
}

/// The untilted characteristic-function bound for `ξ = ζ − ζ'`.
///
/// The minimum over `r` is taken on `r_points` equally spaced points, which
/// can only overestimate it, so the reported right side is conservative.
pub fn cosine_product_check(xi: &[Atom], a: &[f64], c: f64, r_points: usize) -> CosineProductCheck {
    let lhs: f64 = a
        .iter()
        .map(|&aj| xi.iter().map(|x| x.prob * (2.0 * PI * x.value * aj).cos().abs()).sum::<f64>())
        .product();
    let r_max = 1.0 / c;
    let steps = r_points.max(2) - 1;
    let min_torus = (0..=steps)
        .map(|k| {
            let r = 1.0 + (r_max - 1.0) * k as f64 / steps as f64;
            a.iter().map(|x| torus1(r * x).powi(2)).sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    CosineProductCheck {
        lhs,
        rhs: (-c * min_torus).exp(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    /// `L ≥ 2`.
    pub l: f64,
    pub trials: usize,
    /// Ascending, in `(0, 1]`.
    pub t_grid: Vec<f64>,
}

impl ThresholdParams {
    pub fn validate(&self) -> Result<(), SmallBallError> {
        let bad = |m: &str| Err(SmallBallError::BadThresholdParams(m.into()));
        if !(self.l >= 2.0 && self.l.is_finite()) {
            return bad("L must be at least 2");
        }
        if self.trials == 0 {
            return bad("trials must be positive");
        }
        if self.t_grid.is_empty() || !is_sorted_ascending(&self.t_grid) {
            return bad("t grid must be nonempty and ascending");
        }
        if self.t_grid.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return bad("t grid must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub t: f64,
    pub estimate: ConcentrationEstimate,
    /// `n ln(4Lt)`.
    pub log_target: f64,
    /// `ln(ci_low) ≥ n ln(4Lt)`.
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    /// Largest admissible grid point, or 0.
    pub t_l: f64,
    pub points: Vec<ThresholdPoint>,
}

/// `‖Mv‖₂` without materializing `M`.
pub fn zeroed_norm(params: &ZeroedMatrixParams, v: &[f64], seed: u64) -> f64 {
    let mut mv = vec![0.0; params.n];
    for i in params.d..params.n {
        for j in 0..params.d {
            let h = zeroed_entry(params, seed, i, j);
            if h != 0.0 {
                mv[i] += h * v[j];
                mv[j] += h * v[i];
            }
        }
    }
    mv.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖Mv‖₂` for `trials` independent zeroed matrices, in trial order.
pub fn zeroed_norms(
    v: &[f64],
    zeroed: &ZeroedMatrixParams,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>, SmallBallError> {
    zeroed.validate()?;
    if v.len() != zeroed.n {
        return Err(SmallBallError::Dimension { expected: zeroed.n, got: v.len() });
    }
    Ok((0..trials)
        .into_par_iter()
        .map(|t| zeroed_norm(zeroed, v, trial_seed(seed, t as u64)))
        .collect())
}

/// `T_L` from precomputed norms `‖Mv‖₂` in dimension `n`.
pub fn threshold_from_norms(norms: &[f64], n: usize, tparams: &ThresholdParams) -> Result<ThresholdResult, SmallBallError> {
    tparams.validate()?;
    if norms.is_empty() {
        return Err(SmallBallError::Empty);
    }
    let trials = norms.len() as u64;
    let root_n = (n as f64).sqrt();
    let mut t_l = 0.0;
    let points = tparams
        .t_grid
        .iter()
        .map(|&t| {
            let hits = norms.iter().filter(|&&x| x <= t * root_n).count() as u64;
            let estimate = ConcentrationEstimate::from_counts(hits, trials, WindowCenter::At(0.0));
            let log_target = n as f64 * (4.0 * tparams.l * t).ln();
            let admissible = estimate.ci_low > 0.0 && estimate.ci_low.ln() >= log_target;
            if admissible {
                t_l = t;
            }
            ThresholdPoint {
                t,
                estimate,
                log_target,
                admissible,
            }
        })
        .collect();
    Ok(ThresholdResult { t_l, points })
}

/// Conservative Monte Carlo estimate of `T_L(v)` on a grid.
pub fn threshold(
    v: &[f64],
    zeroed: &ZeroedMatrixParams,
    tparams: &ThresholdParams,
    seed: u64,
) -> Result<ThresholdResult, SmallBallError> {
    tparams.validate()?;
    let norms = zeroed_norms(v, zeroed, tparams.trials, seed)?;
    threshold_from_norms(&norms, zeroed.n, tparams)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::log_grid_count;

    fn brute_window(sorted: &[f64], eps: f64) -> usize {
        let mut best = 0;
        for i in 0..sorted.len() {
            let c = sorted.iter().filter(|&&x| x >= sorted[i] && x - sorted[i] <= 2.0 * eps).count();
            best = best.max(c);
        }
        best
    }

    #[test]
    fn levy_point_mass_and_grid() {
        let zeros = vec![0.0; 1000];
        assert_eq!(levy_scalar(&zeros, 0.1).unwrap().p_hat, 1.0);
        let mut grid = Vec::new();
        for k in -2..=2 {
            grid.extend(std::iter::repeat(k as f64).take(200));
        }
        let e = levy_scalar(&grid, 0.4).unwrap();
        assert!((e.p_hat - 0.2).abs() < 1e-15);
        assert!(e.ci_low <= e.p_hat && e.p_hat <= e.ci_high);
    }

    #[test]
    fn levy_errors() {
        assert_eq!(levy_scalar(&[], 0.1), Err(SmallBallError::Empty));
        assert!(matches!(levy_scalar(&[0.0; 10], 0.1), Err(SmallBallError::TooFewSamples { .. })));
        let mut rev: Vec<f64> = (0..1000).map(|x| x as f64).collect();
        rev.reverse();
        assert_eq!(levy_scalar(&rev, 0.1), Err(SmallBallError::Unsorted));
    }

    #[test]
    fn levy_matches_brute_force() {
        let mut rng = CounterRng::new(3, Domain::Auxiliary, 0, 0);
        let mut xs: Vec<f64> = (0..1500).map(|_| (rng.uniform() * 40.0).floor() / 8.0).collect();
        xs.sort_by(f64::total_cmp);
        let mut prev = 0.0;
        for eps in [0.0, 0.05, 0.1, 0.3, 1.0] {
            let e = levy_scalar(&xs, eps).unwrap();
            assert_eq!(e.hits as usize, brute_window(&xs, eps));
            assert!(e.p_hat >= prev);
            prev = e.p_hat;
        }
    }

    #[test]
    fn small_ball_trivial_cases() {
        let d = Distribution::rademacher();
        let e1 = [1.0, 0.0, 0.0];
        let r = small_ball(&e1, &d, 0.5, 2000, 1).unwrap();
        assert_eq!(r.centered.hits, 0);
        let r = small_ball(&e1, &d, 1.0, 2000, 1).unwrap();
        assert_eq!(r.centered.p_hat, 1.0);
    }

    #[test]
    fn constant_vector_atoms() {
        let n = 10;
        let v = vec![1.0 / (n as f64).sqrt(); n];
        let law = linear_form_atoms(&Distribution::rademacher(), &v).unwrap();
        assert_eq!(law.len(), 11);
        let p = levy_atoms(&law, 0.4 / (n as f64).sqrt());
        assert!((p - 252.0 / 1024.0).abs() < 1e-12);
    }

    #[test]
    fn charfn_examples() {
        let d = Distribution::rademacher();
        let nu = 0.3;
        let cf = charfn_lazy_symmetrized(&d, nu).unwrap();
        assert!((cf.eval_real(0.25) - (1.0 - nu)).abs() < 1e-12);
        assert!((cf.eval(0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((cf.eval_real(3.0) - 1.0).abs() < 1e-12);
        assert!(charfn_exact(&Distribution::gaussian()).is_err());
    }

    #[test]
    fn monte_carlo_charfn_agrees() {
        let d = Distribution::lazy_signed(0.5).unwrap();
        let exact = charfn_exact(&d).unwrap();
        let trials = 40_000;
        let mc = charfn_monte_carlo(&d, trials, 2);
        for k in 0..50 {
            let t = k as f64 * 0.05;
            assert!((exact.eval(t) - mc.eval(t)).norm() <= 4.0 / (trials as f64).sqrt());
            assert!(mc.abs(t) <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn xi_bounds_hold_for_rademacher() {
        let grid: Vec<f64> = (0..1000).map(|k| 4.0 * k as f64 / 999.0).collect();
        let r = xi_bounds_check(&Distribution::rademacher(), 0.25, &grid).unwrap();
        assert_eq!(r.lower_violations + r.upper_violations + r.domination_violations, 0, "{r:?}");
        let at_zero = xi_bounds_check(&Distribution::rademacher(), 0.25, &[0.0]).unwrap();
        assert!(at_zero.max_violation.abs() < 1e-15);
    }

    #[test]
    fn xi_lower_bound_needs_small_laziness() {
        // With νp close to 1/2 the lower bound fails for Rademacher near t = 1/4.
        let grid: Vec<f64> = (0..1000).map(|k| k as f64 / 999.0).collect();
        let r = xi_bounds_check(&Distribution::rademacher(), 0.99, &grid).unwrap();
        assert!(r.lower_violations > 0);
        assert_eq!(r.upper_violations, 0);
    }

    #[test]
    fn cosine_bounds() {
        let grid: Vec<f64> = (0..1000).map(|k| -1.0 + 2.0 * k as f64 / 999.0).collect();
        let r = cosine_bounds_check(&grid);
        assert_eq!(r.violations, 0);
        assert!(cosine_bounds_check(&[0.0]).max_violation.abs() < 1e-15);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let s = simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, 10);
        assert!((s - (3.75 - 3.0 + 3.0)).abs() < 1e-12);
    }

    #[test]
    fn esseen_single_rademacher() {
        let r = esseen_bound_check(&Distribution::rademacher(), &[1.0], 0.5, 10_000).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-15);
        // |cos 2πθ| on [−2, 2] integrates to 8/π
        assert!((r.integral - 8.0 / PI).abs() < 1e-6, "{r:?}");
        assert!(r.richardson_rel < 1e-6, "{r:?}");
        let wide = esseen_bound_check(&Distribution::rademacher(), &[1.0, 0.0], 5.0, 10_000).unwrap();
        assert!((wide.lhs - 1.0).abs() < 1e-15);
    }

    #[test]
    fn decoupling_trivial_and_random() {
        let d = Distribution::rademacher();
        let m = SymMatrix::zeros(4);
        let r = decoupling_check(&d, &m, &[0.0; 4], 0.0, &[0, 1]).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12 && (r.rhs - 1.0).abs() < 1e-12);
        let mut rng = CounterRng::new(8, Domain::Auxiliary, 0, 0);
        for _ in 0..20 {
            let m = SymMatrix::from_upper_fn(4, |_, _| rng.uniform() * 2.0 - 1.0);
            let u: Vec<f64> = (0..4).map(|_| rng.uniform() - 0.5).collect();
            let theta = rng.uniform();
            let r = decoupling_check(&d, &m, &u, theta, &[1, 3]).unwrap();
            assert!(r.holds(), "{r:?}");
        }
        assert!(decoupling_check(&d, &m, &[0.0; 4], 0.0, &[0, 0]).is_err());
    }

    #[test]
    fn decoupling_with_zero_matrix_factorizes() {
        // M = 0: lhs = ∏ cosh(u_i)², rhs = ∏_J cosh(u_j)² · ∏_I cosh(2u_i)
        let d = Distribution::rademacher();
        let u = [0.3, -0.2, 0.5, 0.1];
        let r = decoupling_check(&d, &SymMatrix::zeros(4), &u, 0.7, &[0, 2]).unwrap();
        let lhs: f64 = u.iter().map(|x: &f64| x.cosh().powi(2)).product();
        let rhs = 0.3f64.cosh().powi(2) * 0.5f64.cosh().powi(2) * 0.4f64.cosh() * 0.2f64.cosh();
        assert!((r.lhs - lhs).abs() < 1e-12);
        assert!((r.rhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn cosine_product_bound_on_random_grids() {
        let xi = crate::ensembles::symmetrized_atoms(&Distribution::rademacher()).unwrap();
        let mut rng = CounterRng::new(4, Domain::Auxiliary, 0, 0);
        for _ in 0..200 {
            let a: Vec<f64> = (0..6).map(|_| rng.uniform() * 2.0 - 1.0).collect();
            assert!(cosine_product_check(&xi, &a, 0.1, 400).holds());
        }
    }

    #[test]
    fn threshold_of_zero_matrix() {
        let base = Distribution::rademacher();
        let n = 6;
        let zeroed = ZeroedMatrixParams::new(n, 2, 0.0, base).unwrap();
        let v = vec![1.0 / (n as f64).sqrt(); n];
        let l = 2.0;
        let tp = ThresholdParams {
            l,
            trials: 2000,
            t_grid: log_grid_count(1e-3, 1.0, 400),
        };
        let r = threshold(&v, &zeroed, &tp, 1).unwrap();
        let ci_low = r.points[0].estimate.ci_low;
        let expected = tp
            .t_grid
            .iter()
            .copied()
            .filter(|&t| n as f64 * (4.0 * l * t).ln() <= ci_low.ln())
            .fold(0.0, f64::max);
        assert_eq!(r.t_l, expected);
        assert!(r.t_l <= 1.0 / (4.0 * l));
        assert!(r.t_l > 0.9 / (4.0 * l));
        let zero_v = threshold(&vec![0.0; n], &zeroed, &tp, 1).unwrap();
        assert_eq!(zero_v.t_l, r.t_l);
        let bigger_l = ThresholdParams { l: 3.0, ..tp };
        assert!(threshold(&v, &zeroed, &bigger_l, 1).unwrap().t_l <= r.t_l);
    }

    #[test]
    fn zeroed_norm_matches_dense() {
        let p = ZeroedMatrixParams::new(9, 3, 0.5, Distribution::gaussian()).unwrap();
        let v: Vec<f64> = (0..9).map(|k| (k as f64 * 0.7).sin()).collect();
        let m = crate::ensembles::sample_zeroed(&p, 5).unwrap();
        let dense = m.mul_vec(&v).iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((dense - zeroed_norm(&p, &v, 5)).abs() < 1e-12);
    }
}
