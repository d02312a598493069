//! Lower tail of the least singular value.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::*;
use crate::ensembles::{sample_sym, Distribution};
use crate::spectral::{eigenvalues_sym, singular_cutoff};
use crate::stats::{log_grid, log_log_fit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailConfig {
    pub ensemble: Distribution,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Values of `ε` in `P(σ_min ≤ ε n^{-1/2})`.
    pub eps_grid: Vec<f64>,
    /// Grid points with fewer hits are left out of the slope fit.
    pub fit_min_hits: u64,
}

impl Default for TailConfig {
    fn default() -> Self {
        Self {
            ensemble: Distribution::rademacher(),
            n: 100,
            trials: 10_000,
            seed: 0,
            eps_grid: log_grid(1e-3, 1e-1, 12),
            fit_min_hits: 10,
        }
    }
}

impl ExperimentConfig for TailConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        if self.n < 2 {
            return config_err("n must be at least 2");
        }
        check_trials("trials", self.trials)?;
        check_grid("eps_grid", &self.eps_grid)
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
pub struct TailPartial {
    pub trials: u64,
    /// Hits per grid point.
    pub hits: Vec<u64>,
    pub singular: u64,
}

pub struct TailCurve {
    cfg: TailConfig,
}

impl Study for TailCurve {
    type Config = TailConfig;
    type Partial = TailPartial;
    const NAME: &'static str = "tail";

    fn new(cfg: TailConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    fn config(&self) -> &TailConfig {
        &self.cfg
    }

    fn units(&self) -> usize {
        chunk_count(self.cfg.trials)
    }

    fn run_unit(&self, index: usize) -> Result<TailPartial, ExperimentError> {
        self.check_unit(index)?;
        let c = &self.cfg;
        let root_n = (c.n as f64).sqrt();
        let cutoff = singular_cutoff(c.n);
        let smins: Vec<f64> = chunk_range(index, c.trials)
            .into_par_iter()
            .map(|t| {
                let a = sample_sym(&c.ensemble, c.n, sample_seed(c.seed, c.n, t))?;
                let eigs = eigenvalues_sym(&a)?;
                Ok(eigs.iter().fold(f64::INFINITY, |m, x| m.min(x.abs())))
            })
            .collect::<Result<_, ExperimentError>>()?;
        let hits = c
            .eps_grid
            .iter()
            .map(|&e| smins.iter().filter(|&&s| s * root_n <= e).count() as u64)
            .collect();
        Ok(TailPartial {
            trials: smins.len() as u64,
            hits,
            singular: smins.iter().filter(|&&s| s < cutoff).count() as u64,
        })
    }

    fn assemble(&self, partials: Vec<TailPartial>) -> Result<ExperimentReport, ExperimentError> {
        self.check_partials(&partials)?;
        let c = &self.cfg;
        let mut hits = vec![0u64; c.eps_grid.len()];
        let (mut trials, mut singular) = (0u64, 0u64);
        for p in &partials {
            add_counts(&mut hits, &p.hits);
            trials += p.trials;
            singular += p.singular;
        }
        let est: Vec<_> = hits.iter().map(|&h| estimate(h, trials)).collect();

        let mut report = ExperimentReport::new(Self::NAME, self.config_json());
        let mut table = Table::new("tail", &["epsilon", "hits", "trials", "p_hat", "ci_low", "ci_high", "edelman_ref"]);
        let mut plot = Plot::new("tail", "epsilon", "p_hat", "edelman_ref");
        for (&eps, e) in c.eps_grid.iter().zip(&est) {
            let mut row = vec![Cell::num(eps)];
            row.extend(estimate_cells(e));
            row.push(Cell::num(eps.min(1.0)));
            table.push(row);
            plot.push(eps, e.p_hat, (e.ci_low, e.ci_high), Some(eps.min(1.0)));
        }
        report.tables.push(table);
        report.plots.push(plot);

        // The linear regime: enough hits to be resolved, not yet saturating.
        let (fx, fy): (Vec<f64>, Vec<f64>) = c
            .eps_grid
            .iter()
            .zip(&est)
            .filter(|(_, e)| e.hits >= c.fit_min_hits && e.p_hat <= 0.5)
            .map(|(&x, e)| (x, e.p_hat))
            .unzip();
        if let Some(f) = log_log_fit(&fx, &fy) {
            report.fits.push(Fit::from_linear("loglog_slope", f));
        }
        let c_hat = c
            .eps_grid
            .iter()
            .zip(&est)
            .filter(|(&x, _)| x > 0.0)
            .map(|(&x, e)| e.p_hat / x)
            .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
        report.add_constant("C_hat", c_hat, "max over the grid of p_hat / epsilon");
        report.add_exclusion("singular", singular, trials, "sigma_min below 1e-10 sqrt(n); counted as hits");

        let worst = c
            .eps_grid
            .iter()
            .zip(&est)
            .map(|(&x, e)| e.p_hat - x - 3.0 * e.half_width())
            .fold(f64::NEG_INFINITY, f64::max);
        report.add_check(
            "gaussian_baseline",
            CheckKind::Expectation,
            worst <= 0.0,
            format!("max of p_hat - eps - 3 half_width = {worst:.3e}; the bound p <= eps is known for gaussian entries"),
        );
        report.add_check(
            "monotone_in_eps",
            CheckKind::Invariant,
            hits.windows(2).all(|w| w[0] <= w[1]),
            "hit counts are nondecreasing along the grid",
        );
        Ok(report)
    }
}
