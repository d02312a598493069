//! Small-ball curves of `⟨X, v⟩` set against the LCD of `v`.

use serde::{Deserialize, Serialize};

use super::vectors::expand_all;
use super::*;
use crate::arithmetic::{l2_norm, lcd, LcdParams, LcdResult};
use crate::ensembles::{Distribution, EntryLaw};
use crate::rng::{derive_key, Domain};
use crate::smallball::{levy_atoms, levy_scalar, linear_form_atoms, linear_form_samples, MIN_LEVY_SAMPLES};
use crate::stats::{log_grid, wilson_z};

/// Largest exact atom table attempted for the reference column.
const EXACT_ATOM_BUDGET: f64 = (1u64 << 20) as f64;

/// Normal quantile used for the exact-law agreement check (two-sided 99.9%).
const Z999: f64 = 3.290_526_731_491_926;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmallBallConfig {
    pub ensemble: Distribution,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub eps_grid: Vec<f64>,
    pub family: Vec<VectorSpec>,
    pub alpha: f64,
    pub gamma: f64,
    pub lcd_cap: f64,
    /// The constant `Ĉ` in `p̂ ≤ Ĉε`.
    pub c_hat: f64,
    /// Structured vectors are expected to break the bound where `ε·D ≤ scale_gap`.
    pub scale_gap: f64,
}

impl Default for SmallBallConfig {
    fn default() -> Self {
        Self {
            ensemble: Distribution::rademacher(),
            n: 100,
            trials: 20_000,
            seed: 0,
            eps_grid: log_grid(1e-3, 1e-1, 4),
            family: vec![
                VectorSpec::Constant,
                VectorSpec::TwoLevel { split: 0.5, ratio: 2.0 },
                VectorSpec::RandomUnit { count: 3, seed: 1 },
            ],
            alpha: 0.01,
            gamma: 0.1,
            lcd_cap: 1e3,
            c_hat: 2.0,
            scale_gap: 0.1,
        }
    }
}

impl ExperimentConfig for SmallBallConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials < MIN_LEVY_SAMPLES {
            return config_err(format!("trials must be at least {MIN_LEVY_SAMPLES}"));
        }
        check_grid("eps_grid", &self.eps_grid)?;
        LcdParams::new(self.alpha, self.gamma).with_cap(self.lcd_cap).validate()?;
        if !(self.c_hat > 0.0 && self.scale_gap > 0.0) {
            return config_err("c_hat and scale_gap must be positive");
        }
        let vs = expand_all(&self.family, self.n)?;
        if vs.iter().any(|v| l2_norm(&v.values) == 0.0) {
            return config_err("family vectors must be nonzero");
        }
        Ok(())
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
        if let Some(n) = o.n {
            self.n = n;
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmallBallPartial {
    pub label: String,
    pub structured: bool,
    pub lcd: LcdResult,
    pub trials: u64,
    /// Counts of `|⟨X, v⟩| ≤ ε`.
    pub centered: Vec<u64>,
    /// Largest window counts over all centers.
    pub swept: Vec<u64>,
    /// Exact `P(|⟨X, v⟩| ≤ ε)` and `sup_w P(|⟨X, v⟩ − w| ≤ ε)` when computable.
    pub exact: Option<Vec<f64>>,
    pub exact_swept: Option<Vec<f64>>,
}

pub struct SmallBallVsLcd {
    cfg: SmallBallConfig,
    vectors: Vec<LabeledVector>,
}

/// Upper bound on the atoms of `⟨X, v⟩`: equal coordinates pool into a multinomial.
fn atom_budget(v: &[f64], atoms: usize) -> f64 {
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let mut total = 1.0;
    let mut i = 0;
    while i < mags.len() {
        let mut j = i;
        while j < mags.len() && mags[j] - mags[i] <= 1e-12 * mags[i].max(1e-300) {
            j += 1;
        }
        let m = (j - i) as f64;
        total *= m * (atoms as f64 - 1.0) + 1.0;
        i = j;
    }
    total
}

fn exact_columns(dist: &Distribution, v: &[f64], grid: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    if *dist.law() == EntryLaw::Gaussian {
        let s = l2_norm(v);
        let centered: Vec<f64> = grid.iter().map(|&e| libm::erf(e / (s * std::f64::consts::SQRT_2))).collect();
        // A centered gaussian is most concentrated at its mean.
        return Some((centered.clone(), centered));
    }
    let atoms = dist.atoms()?;
    if atom_budget(v, atoms.len()) > EXACT_ATOM_BUDGET {
        return None;
    }
    let law = linear_form_atoms(dist, v).ok()?;
    let centered = grid
        .iter()
        .map(|&e| law.iter().filter(|a| a.value.abs() <= e * (1.0 + 1e-12)).map(|a| a.prob).sum::<f64>().min(1.0))
        .collect();
    let swept = grid.iter().map(|&e| levy_atoms(&law, e)).collect();
    Some((centered, swept))
}

impl Study for SmallBallVsLcd {
    type Config = SmallBallConfig;
    type Partial = SmallBallPartial;
    const NAME: &'static str = "smallball";

    fn new(cfg: SmallBallConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        let vectors = expand_all(&cfg.family, cfg.n)?;
        Ok(Self { cfg, vectors })
    }

    fn config(&self) -> &SmallBallConfig {
        &self.cfg
    }

    fn units(&self) -> usize {
        self.vectors.len()
    }

    fn run_unit(&self, index: usize) -> Result<SmallBallPartial, ExperimentError> {
        self.check_unit(index)?;
        let c = &self.cfg;
        let lv = &self.vectors[index];
        let params = LcdParams::new(c.alpha, c.gamma).with_cap(c.lcd_cap);
        let lcd = lcd(&lv.values, &params)?;
        let seed = derive_key(c.seed, Domain::Unit, index as u64, 0);
        let mut z = linear_form_samples(&lv.values, &c.ensemble, c.trials, seed)?;
        let centered = c
            .eps_grid
            .iter()
            .map(|&e| z.iter().filter(|x| x.abs() <= e).count() as u64)
            .collect();
        z.sort_by(f64::total_cmp);
        let swept = c
            .eps_grid
            .iter()
            .map(|&e| Ok(levy_scalar(&z, e)?.hits))
            .collect::<Result<_, ExperimentError>>()?;
        let (exact, exact_swept) = match exact_columns(&c.ensemble, &lv.values, &c.eps_grid) {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        Ok(SmallBallPartial {
            label: lv.label.clone(),
            structured: lv.structured,
            lcd,
            trials: c.trials as u64,
            centered,
            swept,
            exact,
            exact_swept,
        })
    }

    fn assemble(&self, partials: Vec<SmallBallPartial>) -> Result<ExperimentReport, ExperimentError> {
        self.check_partials(&partials)?;
        let c = &self.cfg;
        let mut report = ExperimentReport::new(Self::NAME, self.config_json());
        let mut table = Table::new(
            "smallball",
            &[
                "vector", "structured", "lcd", "lcd_finite", "epsilon", "hits", "trials", "p_hat", "ci_low", "ci_high",
                "exact", "swept_p_hat", "exact_swept",
            ],
        );
        let (mut unstructured_ok, mut structured_ok, mut structured_tested) = (true, true, 0);
        let (mut exact_ok, mut exact_tested) = (true, 0);
        let mut fitted: Option<f64> = None;
        for p in &partials {
            let d = p.lcd.value.bound();
            let mut plot = Plot::new(&format!("smallball_{}", p.label), "epsilon", "p_hat", "exact");
            for (ei, &eps) in c.eps_grid.iter().enumerate() {
                let e = estimate(p.centered[ei], p.trials);
                let sw = p.swept[ei] as f64 / p.trials as f64;
                let exact = p.exact.as_ref().map(|x| x[ei]);
                let exact_sw = p.exact_swept.as_ref().map(|x| x[ei]);
                let mut row = vec![
                    Cell::text(&p.label),
                    Cell::text(p.structured.to_string()),
                    Cell::num(d),
                    Cell::text(p.lcd.value.is_finite().to_string()),
                    Cell::num(eps),
                ];
                row.extend(estimate_cells(&e));
                row.extend([Cell::opt(exact), Cell::num(sw), Cell::opt(exact_sw)]);
                table.push(row);
                plot.push(eps, e.p_hat, (e.ci_low, e.ci_high), exact);

                if let Some(x) = exact {
                    let (lo, hi) = wilson_z(e.hits, e.trials, Z999);
                    exact_tested += 1;
                    exact_ok &= lo <= x && x <= hi;
                }
                if eps <= 0.0 {
                    continue;
                }
                if p.structured {
                    if p.lcd.value.is_finite() && eps * d <= c.scale_gap {
                        structured_tested += 1;
                        structured_ok &= e.p_hat - 3.0 * e.half_width() > c.c_hat * eps;
                    }
                } else {
                    unstructured_ok &= e.p_hat <= c.c_hat * eps + 3.0 * e.half_width();
                    fitted = Some(fitted.map_or(e.p_hat / eps, |m: f64| m.max(e.p_hat / eps)));
                }
            }
            report.plots.push(plot);
        }
        report.tables.push(table);
        report.add_constant(
            "C_fit_unstructured",
            fitted,
            "max of p_hat / epsilon over the unstructured vectors",
        );
        report.add_check(
            "unstructured_below_c_eps",
            CheckKind::Expectation,
            unstructured_ok,
            format!("unstructured vectors satisfy p_hat <= {} eps up to 3 half widths", c.c_hat),
        );
        report.add_check(
            "structured_above_c_eps",
            CheckKind::Expectation,
            structured_ok,
            format!(
                "{structured_tested} structured (vector, eps) pairs with eps D <= {} exceed {} eps by 3 half widths",
                c.scale_gap, c.c_hat
            ),
        );
        report.add_check(
            "exact_within_ci",
            CheckKind::Expectation,
            exact_ok,
            format!("{exact_tested} exact values checked against 99.9% Wilson intervals"),
        );
        Ok(report)
    }
}
