//! Eigenvalue gaps `λ_k − λ_{k+ℓ}` and simple spectrum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::*;
use crate::ensembles::{sample_sym, Distribution};
use crate::spectral::{eigenvalues_sym, gap, min_gap};
use crate::stats::{log_grid, log_log_fit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapsConfig {
    pub ensemble: Distribution,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// 1-based index in decreasing order; defaults to `n/2`.
    pub k: Option<usize>,
    pub ells: Vec<usize>,
    /// Values of `ε` in `P(λ_k − λ_{k+ℓ} ≤ ε n^{-1/2})`.
    pub eps_grid: Vec<f64>,
    pub fit_min_hits: u64,
    /// A sample counts as having a repeated eigenvalue below this gap.
    pub repeat_cutoff: f64,
}

impl Default for GapsConfig {
    fn default() -> Self {
        Self {
            ensemble: Distribution::rademacher(),
            n: 50,
            trials: 10_000,
            seed: 0,
            k: None,
            ells: vec![1, 2],
            eps_grid: log_grid(0.05, 4.0, 12),
            fit_min_hits: 10,
            repeat_cutoff: 1e-10,
        }
    }
}

impl GapsConfig {
    pub fn k(&self) -> usize {
        self.k.unwrap_or(self.n / 2)
    }
}

impl ExperimentConfig for GapsConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        check_trials("trials", self.trials)?;
        check_grid("eps_grid", &self.eps_grid)?;
        if self.ells.is_empty() || self.ells.windows(2).any(|w| w[0] >= w[1]) {
            return config_err("ells must be nonempty and strictly ascending");
        }
        let k = self.k();
        let top = *self.ells.last().expect("nonempty");
        if self.ells[0] == 0 || k == 0 || k + top > self.n {
            return config_err(format!("need l >= 1 and 1 <= k <= n - l (k = {k}, n = {})", self.n));
        }
        if !(self.repeat_cutoff > 0.0) {
            return config_err("repeat_cutoff must be positive");
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
pub struct GapsPartial {
    pub trials: u64,
    /// `hits[ℓ index][ε index]`.
    pub hits: Vec<Vec<u64>>,
    pub repeated: u64,
    pub smallest_gap: f64,
}

pub struct Repulsion {
    cfg: GapsConfig,
}

impl Study for Repulsion {
    type Config = GapsConfig;
    type Partial = GapsPartial;
    const NAME: &'static str = "gaps";

    fn new(cfg: GapsConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    fn config(&self) -> &GapsConfig {
        &self.cfg
    }

    fn units(&self) -> usize {
        chunk_count(self.cfg.trials)
    }

    fn run_unit(&self, index: usize) -> Result<GapsPartial, ExperimentError> {
        self.check_unit(index)?;
        let c = &self.cfg;
        let root_n = (c.n as f64).sqrt();
        let k = c.k();
        // Per trial: scaled gaps for each ℓ, then the smallest consecutive gap.
        let samples: Vec<(Vec<f64>, f64)> = chunk_range(index, c.trials)
            .into_par_iter()
            .map(|t| {
                let a = sample_sym(&c.ensemble, c.n, sample_seed(c.seed, c.n, t))?;
                let eigs = eigenvalues_sym(&a)?;
                let gaps = c
                    .ells
                    .iter()
                    .map(|&l| gap(&eigs, k, l).map(|g| g * root_n))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((gaps, min_gap(&eigs)))
            })
            .collect::<Result<_, ExperimentError>>()?;
        let hits = (0..c.ells.len())
            .map(|li| {
                c.eps_grid
                    .iter()
                    .map(|&e| samples.iter().filter(|s| s.0[li] <= e).count() as u64)
                    .collect()
            })
            .collect();
        Ok(GapsPartial {
            trials: samples.len() as u64,
            hits,
            repeated: samples.iter().filter(|s| s.1 < c.repeat_cutoff).count() as u64,
            smallest_gap: samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min),
        })
    }

    fn assemble(&self, partials: Vec<GapsPartial>) -> Result<ExperimentReport, ExperimentError> {
        self.check_partials(&partials)?;
        let c = &self.cfg;
        let mut hits = vec![vec![0u64; c.eps_grid.len()]; c.ells.len()];
        let (mut trials, mut repeated, mut smallest) = (0u64, 0u64, f64::INFINITY);
        for p in &partials {
            for (acc, h) in hits.iter_mut().zip(&p.hits) {
                add_counts(acc, h);
            }
            trials += p.trials;
            repeated += p.repeated;
            smallest = smallest.min(p.smallest_gap);
        }

        let mut report = ExperimentReport::new(Self::NAME, self.config_json());
        let mut table = Table::new("gaps", &["ell", "epsilon", "hits", "trials", "p_hat", "ci_low", "ci_high"]);
        for (li, &l) in c.ells.iter().enumerate() {
            let est: Vec<_> = hits[li].iter().map(|&h| estimate(h, trials)).collect();
            let c_hat = c
                .eps_grid
                .iter()
                .zip(&est)
                .filter(|(&x, _)| x > 0.0)
                .map(|(&x, e)| e.p_hat.powf(1.0 / l as f64) / x)
                .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
            let mut plot = Plot::new(&format!("gaps_l{l}"), "epsilon", "p_hat", "fitted_bound");
            for (&eps, e) in c.eps_grid.iter().zip(&est) {
                let mut row = vec![Cell::int(l), Cell::num(eps)];
                row.extend(estimate_cells(e));
                table.push(row);
                plot.push(eps, e.p_hat, (e.ci_low, e.ci_high), c_hat.map(|ch| (ch * eps).powi(l as i32)));
            }
            report.plots.push(plot);
            let (fx, fy): (Vec<f64>, Vec<f64>) = c
                .eps_grid
                .iter()
                .zip(&est)
                .filter(|(_, e)| e.hits >= c.fit_min_hits && e.p_hat <= 0.5)
                .map(|(&x, e)| (x, e.p_hat))
                .unzip();
            if let Some(f) = log_log_fit(&fx, &fy) {
                report.fits.push(Fit::from_linear(&format!("loglog_slope_l{l}"), f));
            }
            report.add_constant(
                &format!("C_hat_l{l}"),
                c_hat,
                "max over the grid of p_hat^(1/l) / epsilon",
            );
            let below = c_hat.is_some_and(|ch| {
                c.eps_grid
                    .iter()
                    .zip(&est)
                    .all(|(&x, e)| e.p_hat <= (ch * x).powi(l as i32) * (1.0 + 1e-12))
            });
            report.add_check(
                &format!("below_fitted_bound_l{l}"),
                CheckKind::Expectation,
                below || c.eps_grid.is_empty(),
                "p_hat <= (C_hat eps)^l at every grid point",
            );
        }
        report.tables.push(table);

        let mut simple = Table::new("simple_spectrum", &["trials", "repeated", "smallest_gap"]);
        simple.push(vec![Cell::int(trials), Cell::int(repeated), Cell::num(smallest)]);
        report.tables.push(simple);

        let monotone = hits.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| b <= a));
        report.add_check(
            "monotone_in_ell",
            CheckKind::Invariant,
            monotone,
            "gap probabilities are nonincreasing in l at each epsilon",
        );
        report.add_check(
            "simple_spectrum",
            CheckKind::Expectation,
            repeated == 0,
            format!(
                "{repeated} of {trials} samples with a gap below {:e}; smallest gap {smallest:.3e}",
                c.repeat_cutoff
            ),
        );
        Ok(report)
    }
}
