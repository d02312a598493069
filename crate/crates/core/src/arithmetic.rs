//! Arithmetic structure of vectors: torus distance, the least common
//! denominator and its subvector variant, and compressibility.
//!
//! The LCD is an infimum over a continuous parameter. It is located with a
//! Lipschitz branch-and-bound: `φ ↦ ‖φv‖_T − min{γφ‖v‖₂, √(αn)}` is Lipschitz
//! with constant `(1 + γ)‖v‖₂`, so a cell whose endpoint values are large
//! enough is certified root-free and skipped, and every other cell is bisected
//! until the leftmost admissible `φ` is pinned to `1e-12` relative precision.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{CounterRng, Domain};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArithmeticError {
    #[error("{name} = {value} must lie in (0, 1)")]
    OutOfUnitInterval { name: &'static str, value: f64 },
    #[error("cap must be positive, got {0}")]
    NonPositiveCap(f64),
    #[error("grid step {step} exceeds the resolution bound {bound}")]
    GridTooCoarse { step: f64, bound: f64 },
    #[error("vector is zero or empty")]
    ZeroVector,
    #[error("exact search needs C({n}, {m}) = {count:e} subsets, above the limit 1e6")]
    SearchTooLarge { n: usize, m: usize, count: f64 },
}

/// Distance from `v` to the integer lattice.
pub fn torus_dist(v: &[f64]) -> f64 {
    v.iter()
        .map(|x| {
            let d = x - x.round();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[inline]
fn scaled_torus_dist(v: &[f64], phi: f64) -> f64 {
    v.iter()
        .map(|x| {
            let y = phi * x;
            let d = y - y.round();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LcdParams {
    pub alpha: f64,
    pub gamma: f64,
    /// Upper end of the search range.
    pub cap: f64,
    /// Scan cell width; defaults to `γ / (8 max(1, ‖v‖₂))`.
    #[serde(default)]
    pub grid_step: Option<f64>,
}

impl LcdParams {
    pub fn new(alpha: f64, gamma: f64) -> Self {
        Self {
            alpha,
            gamma,
            cap: 1e6,
            grid_step: None,
        }
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = cap;
        self
    }

    pub fn with_grid_step(mut self, step: f64) -> Self {
        self.grid_step = Some(step);
        self
    }

    pub fn validate(&self) -> Result<(), ArithmeticError> {
        for (name, value) in [("alpha", self.alpha), ("gamma", self.gamma)] {
            if !(value > 0.0 && value < 1.0) {
                return Err(ArithmeticError::OutOfUnitInterval { name, value });
            }
        }
        if !(self.cap > 0.0 && self.cap.is_finite()) {
            return Err(ArithmeticError::NonPositiveCap(self.cap));
        }
        Ok(())
    }

    fn step_for(&self, norm: f64) -> Result<f64, ArithmeticError> {
        let bound = self.gamma / (4.0 * norm.max(1.0));
        match self.grid_step {
            None => Ok(bound / 2.0),
            Some(step) if step > 0.0 && step <= bound => Ok(step),
            Some(step) => Err(ArithmeticError::GridTooCoarse { step, bound }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum LcdValue {
    Finite(f64),
    /// No admissible `φ` up to the cap.
    Unbounded(f64),
}

impl LcdValue {
    /// The located value, or the cap as a lower bound.
    pub fn bound(&self) -> f64 {
        match *self {
            LcdValue::Finite(x) | LcdValue::Unbounded(x) => x,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, LcdValue::Finite(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingConstraint {
    GammaBranch,
    AlphaBranch,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LcdResult {
    pub value: LcdValue,
    /// Admissible dilation; equals the cap when unbounded.
    pub witness_t: f64,
    pub binding_constraint: BindingConstraint,
}

struct Condition<'a> {
    v: &'a [f64],
    norm: f64,
    gamma: f64,
    alpha_cap: f64,
}

impl Condition<'_> {
    /// Nonpositive exactly when `φ` is admissible.
    #[inline]
    fn excess(&self, phi: f64) -> f64 {
        scaled_torus_dist(self.v, phi) - (self.gamma * phi * self.norm).min(self.alpha_cap)
    }

    fn lipschitz(&self) -> f64 {
        (1.0 + self.gamma) * self.norm
    }

    /// Leftmost admissible point in `[a, b]`, given that none lies left of `a`.
    fn first_root(&self, a: f64, b: f64, fa: f64, fb: f64) -> Option<f64> {
        if fa <= 0.0 {
            return Some(a);
        }
        if 0.5 * (fa + fb - self.lipschitz() * (b - a)) > 0.0 {
            return None;
        }
        if b - a <= 1e-12 * b {
            return (fb <= 0.0).then_some(b);
        }
        let m = 0.5 * (a + b);
        let fm = self.excess(m);
        self.first_root(a, m, fa, fm)
            .or_else(|| self.first_root(m, b, fm, fb))
    }
}

/// `D_{α,γ}(v)`, using `n = v.len()` in the `√(αn)` branch.
pub fn lcd(v: &[f64], params: &LcdParams) -> Result<LcdResult, ArithmeticError> {
    lcd_in_dim(v, params, v.len())
}

/// `D_{α,γ}(v)` with an explicit ambient dimension in the `√(αn)` branch.
pub fn lcd_in_dim(v: &[f64], params: &LcdParams, n: usize) -> Result<LcdResult, ArithmeticError> {
    params.validate()?;
    let norm = l2_norm(v);
    let max_abs = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if v.is_empty() || norm == 0.0 {
        return Err(ArithmeticError::ZeroVector);
    }
    let step = params.step_for(norm)?;
    let cond = Condition {
        v,
        norm,
        gamma: params.gamma,
        alpha_cap: (params.alpha * n as f64).sqrt(),
    };
    let lip = cond.lipschitz();

    // Below 1/(2 max|v_j|) the torus distance is φ‖v‖₂, which exceeds both branches.
    let mut a = (0.5 / max_abs).min(params.cap);
    let mut fa = cond.excess(a);
    let found = loop {
        if fa <= 0.0 {
            break Some(a);
        }
        if a >= params.cap {
            break None;
        }
        let skip = fa / lip;
        if skip > step {
            // Certified root-free on [a, a + skip).
            a = (a + skip).min(params.cap);
            fa = cond.excess(a);
            continue;
        }
        let b = (a + step).min(params.cap);
        let fb = cond.excess(b);
        if let Some(root) = cond.first_root(a, b, fa, fb) {
            break Some(root);
        }
        a = b;
        fa = fb;
    };

    Ok(match found {
        Some(phi) => LcdResult {
            value: LcdValue::Finite(phi),
            witness_t: phi,
            binding_constraint: if params.gamma * phi * norm <= cond.alpha_cap {
                BindingConstraint::GammaBranch
            } else {
                BindingConstraint::AlphaBranch
            },
        },
        None => LcdResult {
            value: LcdValue::Unbounded(params.cap),
            witness_t: params.cap,
            binding_constraint: BindingConstraint::None,
        },
    })
}

/// Re-evaluate the defining inequality at the witness with slack `1e-9`.
pub fn witness_holds(v: &[f64], params: &LcdParams, n: usize, result: &LcdResult) -> bool {
    if !result.value.is_finite() {
        return true;
    }
    let t = result.witness_t;
    let rhs = (params.gamma * t * l2_norm(v)).min((params.alpha * n as f64).sqrt());
    torus_dist(&v.iter().map(|x| t * x).collect::<Vec<_>>()) <= rhs + 1e-9
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubvectorMode {
    Exact,
    /// Greedy removal plus `restarts` random subsets. Returns an upper bound.
    Heuristic { restarts: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubvectorLcd {
    pub value: LcdValue,
    /// Retained coordinates, ascending.
    pub subset: Vec<usize>,
    pub subsets_evaluated: usize,
}

/// Largest number of subsets the exact search will enumerate.
pub const EXACT_SUBSET_LIMIT: f64 = 1e6;

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `D̂_{α,γ,μ}(v)`: minimum LCD over subvectors keeping at least `(1 − 2μ)n` coordinates.
///
/// With `normalize` each subvector is rescaled to unit length before the LCD
/// is taken; otherwise `v_I` is used as is. The `√(αn)` branch always uses the
/// full dimension `n`. Subvectors that vanish identically are skipped.
pub fn subvector_lcd(
    v: &[f64],
    params: &LcdParams,
    mu: f64,
    mode: SubvectorMode,
    normalize: bool,
) -> Result<SubvectorLcd, ArithmeticError> {
    params.validate()?;
    if !(0.0..1.0).contains(&mu) {
        return Err(ArithmeticError::OutOfUnitInterval { name: "mu", value: mu });
    }
    let n = v.len();
    if n == 0 || l2_norm(v) == 0.0 {
        return Err(ArithmeticError::ZeroVector);
    }
    let m = ((2.0 * mu * n as f64).floor() as usize).min(n - 1);
    let mut search = Search {
        v,
        params: *params,
        n,
        normalize,
        best: LcdValue::Unbounded(params.cap),
        best_subset: (0..n).collect(),
        evaluated: 0,
    };
    match mode {
        SubvectorMode::Exact => {
            let count = binomial(n, m);
            if count > EXACT_SUBSET_LIMIT {
                return Err(ArithmeticError::SearchTooLarge { n, m, count });
            }
            for removed in 0..=m {
                for_each_combination(n, n - removed, &mut |subset| search.consider(subset))?;
            }
        }
        SubvectorMode::Heuristic { restarts, seed } => {
            let mut keep: Vec<usize> = (0..n).collect();
            let mut witness = search.consider(&keep)?;
            for _ in 0..m {
                let Some(t) = witness else { break };
                // Drop the coordinate farthest from the lattice at the current witness.
                let worst = keep
                    .iter()
                    .enumerate()
                    .max_by(|(_, &i), (_, &j)| {
                        let di = (t * v[i] - (t * v[i]).round()).abs();
                        let dj = (t * v[j] - (t * v[j]).round()).abs();
                        di.total_cmp(&dj).then(j.cmp(&i))
                    })
                    .map(|(pos, _)| pos)
                    .expect("nonempty subset");
                keep.remove(worst);
                witness = search.consider(&keep)?;
            }
            let mut rng = CounterRng::new(seed, Domain::Auxiliary, n as u64, m as u64);
            for _ in 0..restarts {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.shuffle(&mut rng);
                let mut subset = idx[..n - m].to_vec();
                subset.sort_unstable();
                search.consider(&subset)?;
            }
        }
    }
    Ok(SubvectorLcd {
        value: search.best,
        subset: search.best_subset,
        subsets_evaluated: search.evaluated,
    })
}

struct Search<'a> {
    v: &'a [f64],
    params: LcdParams,
    n: usize,
    normalize: bool,
    best: LcdValue,
    best_subset: Vec<usize>,
    evaluated: usize,
}

impl Search<'_> {
    /// Evaluate one subset; returns its witness when the LCD is finite.
    fn consider(&mut self, subset: &[usize]) -> Result<Option<f64>, ArithmeticError> {
        let mut sub: Vec<f64> = subset.iter().map(|&i| self.v[i]).collect();
        let norm = l2_norm(&sub);
        if norm == 0.0 {
            return Ok(None);
        }
        if self.normalize {
            sub.iter_mut().for_each(|x| *x /= norm);
        }
        // Only values below the running best matter.
        let cap = self.best.bound();
        let mut params = self.params.with_cap(cap);
        if let Some(step) = params.grid_step {
            params.grid_step = Some(step.min(params.gamma / (4.0 * l2_norm(&sub).max(1.0))));
        }
        self.evaluated += 1;
        let r = lcd_in_dim(&sub, &params, self.n)?;
        if let LcdValue::Finite(x) = r.value {
            if !self.best.is_finite() || x < self.best.bound() {
                self.best = LcdValue::Finite(x);
                self.best_subset = subset.to_vec();
            }
            return Ok(Some(x));
        }
        Ok(None)
    }
}

fn for_each_combination<E>(
    n: usize,
    k: usize,
    f: &mut impl FnMut(&[usize]) -> Result<Option<f64>, E>,
) -> Result<(), E> {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx)?;
        let Some(i) = (0..k).rev().find(|&i| idx[i] < i + n - k) else {
            return Ok(());
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Compressibility thresholds: `δ`-sparse support, distance `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressParams {
    pub delta: f64,
    pub rho: f64,
}

/// Number of coordinates a `δ`-sparse vector may use.
pub fn sparse_support(n: usize, delta: f64) -> usize {
    ((delta * n as f64).ceil() as usize).clamp(1, n.max(1))
}

/// Distance from `v` to the set of vectors supported on `⌈δn⌉` coordinates.
pub fn compress_dist(v: &[f64], delta: f64) -> f64 {
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    let k = sparse_support(n, delta);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| v[j].abs().total_cmp(&v[i].abs()).then(i.cmp(&j)));
    order[k..].iter().map(|&i| v[i] * v[i]).sum::<f64>().sqrt()
}

pub fn is_compressible(v: &[f64], params: &CompressParams) -> bool {
    compress_dist(v, params.delta) <= params.rho
}

/// Number of coordinates with `|v_j|√n ∈ [c, 1/c]`.
pub fn flat_count(v: &[f64], c: f64) -> usize {
    let s = (v.len() as f64).sqrt();
    v.iter()
        .filter(|x| {
            let y = x.abs() * s;
            y >= c && y <= 1.0 / c
        })
        .count()
}
