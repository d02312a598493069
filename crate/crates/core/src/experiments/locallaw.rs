//! Eigenvalue counts in `(−t, t)` against the semicircle prediction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::*;
use crate::ensembles::{sample_sym, Distribution};
use crate::spectral::{count_interval, eigenvalues_sym};
use crate::stats::Z95;

/// Samples per unit.
const SAMPLE_CHUNK: usize = 20;

/// Limit of `N_A(−t, t)/(√n t)` predicted by the semicircle law.
pub const SEMICIRCLE_RATIO: f64 = 2.0 / PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalLawConfig {
    pub ensemble: Distribution,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub t_grid: Vec<f64>,
    /// Deviations of the ratio from `2/π` beyond this are counted.
    pub deviation: f64,
    /// Relative tolerance of the mean-ratio expectation.
    pub rel_tol: f64,
}

impl Default for LocalLawConfig {
    fn default() -> Self {
        Self {
            ensemble: Distribution::rademacher(),
            n: 400,
            samples: 200,
            seed: 0,
            t_grid: vec![0.5, 1.0, 2.0],
            deviation: PI,
            rel_tol: 0.1,
        }
    }
}

impl ExperimentConfig for LocalLawConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        if self.n < 2 {
            return config_err("n must be at least 2");
        }
        check_trials("samples", self.samples)?;
        check_grid("t_grid", &self.t_grid)?;
        if self.t_grid.first().is_some_and(|&t| t <= 0.0) {
            return config_err("t_grid must be positive");
        }
        if !(self.deviation > 0.0 && self.rel_tol > 0.0) {
            return config_err("deviation and rel_tol must be positive");
        }
        Ok(())
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.trials {
            self.samples = t;
        }
        if let Some(n) = o.n {
            self.n = n;
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalLawPartial {
    pub samples: u64,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
    pub large_deviations: Vec<u64>,
}

pub struct LocalLaw {
    cfg: LocalLawConfig,
}

impl Study for LocalLaw {
    type Config = LocalLawConfig;
    type Partial = LocalLawPartial;
    const NAME: &'static str = "locallaw";

    fn new(cfg: LocalLawConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    fn config(&self) -> &LocalLawConfig {
        &self.cfg
    }

    fn units(&self) -> usize {
        self.cfg.samples.div_ceil(SAMPLE_CHUNK)
    }

    fn run_unit(&self, index: usize) -> Result<LocalLawPartial, ExperimentError> {
        self.check_unit(index)?;
        let c = &self.cfg;
        let root_n = (c.n as f64).sqrt();
        let lo = index * SAMPLE_CHUNK;
        let hi = (lo + SAMPLE_CHUNK).min(c.samples);
        let ratios: Vec<Vec<f64>> = (lo as u64..hi as u64)
            .into_par_iter()
            .map(|s| {
                let a = sample_sym(&c.ensemble, c.n, sample_seed(c.seed, c.n, s))?;
                let eigs = eigenvalues_sym(&a)?;
                c.t_grid
                    .iter()
                    .map(|&t| Ok(count_interval(&eigs, -t, t)? as f64 / (root_n * t)))
                    .collect::<Result<Vec<_>, ExperimentError>>()
            })
            .collect::<Result<_, _>>()?;
        let m = c.t_grid.len();
        let mut part = LocalLawPartial {
            samples: ratios.len() as u64,
            sum: vec![0.0; m],
            sum_sq: vec![0.0; m],
            large_deviations: vec![0; m],
        };
        for r in &ratios {
            for i in 0..m {
                part.sum[i] += r[i];
                part.sum_sq[i] += r[i] * r[i];
                if (r[i] - SEMICIRCLE_RATIO).abs() > c.deviation {
                    part.large_deviations[i] += 1;
                }
            }
        }
        Ok(part)
    }

    fn assemble(&self, partials: Vec<LocalLawPartial>) -> Result<ExperimentReport, ExperimentError> {
        self.check_partials(&partials)?;
        let c = &self.cfg;
        let m = c.t_grid.len();
        let (mut sum, mut sum_sq, mut dev, mut samples) = (vec![0.0; m], vec![0.0; m], vec![0u64; m], 0u64);
        for p in &partials {
            for i in 0..m {
                sum[i] += p.sum[i];
                sum_sq[i] += p.sum_sq[i];
            }
            add_counts(&mut dev, &p.large_deviations);
            samples += p.samples;
        }
        let s = samples as f64;

        let mut report = ExperimentReport::new(Self::NAME, self.config_json());
        let mut table = Table::new(
            "local_law",
            &["t", "samples", "mean_ratio", "sd", "ci_low", "ci_high", "reference", "rel_dev", "large_deviations"],
        );
        let mut plot = Plot::new("local_law", "t", "mean_ratio", "semicircle_2_over_pi");
        let mut worst_rel: f64 = 0.0;
        for i in 0..m {
            let mean = sum[i] / s;
            let var = ((sum_sq[i] - s * mean * mean) / (s - 1.0)).max(0.0);
            let sd = var.sqrt();
            let half = Z95 * sd / s.sqrt();
            let rel = (mean - SEMICIRCLE_RATIO).abs() / SEMICIRCLE_RATIO;
            worst_rel = worst_rel.max(rel);
            table.push(vec![
                Cell::num(c.t_grid[i]),
                Cell::int(samples),
                Cell::num(mean),
                Cell::num(sd),
                Cell::num(mean - half),
                Cell::num(mean + half),
                Cell::num(SEMICIRCLE_RATIO),
                Cell::num(rel),
                Cell::int(dev[i]),
            ]);
            plot.push(c.t_grid[i], mean, (mean - half, mean + half), Some(SEMICIRCLE_RATIO));
        }
        report.tables.push(table);
        report.plots.push(plot);
        report.add_check(
            "mean_near_semicircle",
            CheckKind::Expectation,
            worst_rel <= c.rel_tol,
            format!("largest relative deviation of the mean ratio from 2/pi: {worst_rel:.4}"),
        );
        let total: u64 = dev.iter().sum();
        report.add_check(
            "no_large_deviations",
            CheckKind::Expectation,
            total == 0,
            format!("{total} sample-t pairs deviate from 2/pi by more than {}", c.deviation),
        );
        Ok(report)
    }
}
