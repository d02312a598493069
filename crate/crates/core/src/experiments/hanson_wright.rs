//! Concentration of `‖MX‖₂` around `‖M‖_HS`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::vectors::{gaussian_vector, random_unit};
use super::*;
use crate::ensembles::{sample_col, Distribution};

/// The fixed matrix `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSpec {
    Identity { n: usize },
    /// The `1 × n` row `wᵀ` for a random unit `w`, so `‖MX‖ = |⟨w, X⟩|`.
    RankOne { n: usize, seed: u64 },
    /// `rows × cols` standard gaussian entries divided by `√cols`.
    Gaussian { rows: usize, cols: usize, seed: u64 },
    Explicit { rows: Vec<Vec<f64>> },
}

impl MatrixSpec {
    pub fn build(&self) -> Result<DMatrix<f64>, ExperimentError> {
        let m = match self {
            MatrixSpec::Identity { n } => DMatrix::identity(*n, *n),
            MatrixSpec::RankOne { n, seed } => DMatrix::from_row_slice(1, *n, &random_unit(*n, *seed, 0)),
            MatrixSpec::Gaussian { rows, cols, seed } => {
                let s = (*cols as f64).sqrt();
                let data: Vec<f64> = (0..*rows)
                    .flat_map(|r| gaussian_vector(*cols, *seed, r as u64))
                    .map(|x| x / s)
                    .collect();
                DMatrix::from_row_slice(*rows, *cols, &data)
            }
            MatrixSpec::Explicit { rows } => {
                let cols = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != cols) {
                    return config_err("explicit matrix rows differ in length");
                }
                DMatrix::from_row_slice(rows.len(), cols, &rows.concat())
            }
        };
        if m.nrows() == 0 || m.ncols() == 0 {
            return config_err("matrix must be nonempty");
        }
        if m.iter().any(|x| !x.is_finite()) {
            return config_err("matrix must be finite");
        }
        Ok(m)
    }

    fn set_dim(&mut self, d: usize) {
        match self {
            MatrixSpec::Identity { n } | MatrixSpec::RankOne { n, .. } => *n = d,
            MatrixSpec::Gaussian { rows, cols, .. } => {
                *rows = d;
                *cols = d;
            }
            MatrixSpec::Explicit { .. } => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HwConfig {
    pub ensemble: Distribution,
    pub matrix: MatrixSpec,
    pub trials: usize,
    pub seed: u64,
    pub t_grid: Vec<f64>,
}

impl Default for HwConfig {
    fn default() -> Self {
        Self {
            ensemble: Distribution::gaussian(),
            matrix: MatrixSpec::Identity { n: 50 },
            trials: 10_000,
            seed: 0,
            t_grid: vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
        }
    }
}

impl ExperimentConfig for HwConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        check_trials("trials", self.trials)?;
        check_grid("t_grid", &self.t_grid)?;
        self.matrix.build().map(|_| ())
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
        if let Some(n) = o.n {
            self.matrix.set_dim(n);
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HwPartial {
    pub trials: u64,
    /// Counts of `|‖MX‖ − ‖M‖_HS| > t`.
    pub hits: Vec<u64>,
}

pub struct HansonWright {
    cfg: HwConfig,
    m: DMatrix<f64>,
    hs: f64,
    op: f64,
}

impl HansonWright {
    /// `2 exp(−c t²/(B⁴‖M‖²))`.
    pub fn bound(&self, c: f64, t: f64) -> f64 {
        let b = self.cfg.ensemble.subgaussian_proxy();
        2.0 * (-c * t * t / (b.powi(4) * self.op * self.op)).exp()
    }
}

impl Study for HansonWright {
    type Config = HwConfig;
    type Partial = HwPartial;
    const NAME: &'static str = "hw";

    fn new(cfg: HwConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        let m = cfg.matrix.build()?;
        let hs = m.norm();
        let op = m.clone().svd(false, false).singular_values.max();
        if op == 0.0 {
            return config_err("matrix must be nonzero");
        }
        Ok(Self { cfg, m, hs, op })
    }

    fn config(&self) -> &HwConfig {
        &self.cfg
    }

    fn units(&self) -> usize {
        chunk_count(self.cfg.trials)
    }

    fn run_unit(&self, index: usize) -> Result<HwPartial, ExperimentError> {
        self.check_unit(index)?;
        let c = &self.cfg;
        let cols = self.m.ncols();
        let devs: Vec<f64> = chunk_range(index, c.trials)
            .into_par_iter()
            .map(|t| {
                let x = DVector::from_vec(sample_col(&c.ensemble, cols, sample_seed(c.seed, cols, t))?);
                Ok((&self.m * x).norm() - self.hs)
            })
            .collect::<Result<_, ExperimentError>>()?;
        Ok(HwPartial {
            trials: devs.len() as u64,
            hits: c
                .t_grid
                .iter()
                .map(|&t| devs.iter().filter(|d| d.abs() > t).count() as u64)
                .collect(),
        })
    }

    fn assemble(&self, partials: Vec<HwPartial>) -> Result<ExperimentReport, ExperimentError> {
        self.check_partials(&partials)?;
        let c = &self.cfg;
        let mut hits = vec![0u64; c.t_grid.len()];
        let mut trials = 0;
        for p in &partials {
            add_counts(&mut hits, &p.hits);
            trials += p.trials;
        }
        let est: Vec<_> = hits.iter().map(|&h| estimate(h, trials)).collect();
        let b4 = c.ensemble.subgaussian_proxy().powi(4);

        // Largest c with 2 exp(−c t²/(B⁴‖M‖²)) ≥ ci_low at every grid point.
        let c_hat = c
            .t_grid
            .iter()
            .zip(&est)
            .filter(|(&t, e)| t > 0.0 && e.ci_low > 0.0)
            .map(|(&t, e)| (2.0 / e.ci_low).ln() * b4 * self.op * self.op / (t * t))
            .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r))));

        let mut report = ExperimentReport::new(Self::NAME, self.config_json());
        let mut mat = Table::new("matrix", &["rows", "cols", "hs_norm", "op_norm", "subgaussian_proxy"]);
        mat.push(vec![
            Cell::int(self.m.nrows()),
            Cell::int(self.m.ncols()),
            Cell::num(self.hs),
            Cell::num(self.op),
            Cell::num(c.ensemble.subgaussian_proxy()),
        ]);
        report.tables.push(mat);
        let mut table = Table::new("tail", &["t", "hits", "trials", "p_hat", "ci_low", "ci_high", "bound_at_c_hat"]);
        let mut plot = Plot::new("tail", "t", "p_hat", "bound_at_c_hat");
        for (&t, e) in c.t_grid.iter().zip(&est) {
            let bound = c_hat.map(|ch| self.bound(ch, t));
            let mut row = vec![Cell::num(t)];
            row.extend(estimate_cells(e));
            row.push(Cell::opt(bound));
            table.push(row);
            plot.push(t, e.p_hat, (e.ci_low, e.ci_high), bound);
        }
        report.tables.push(table);
        report.plots.push(plot);
        report.add_constant(
            "c_hat",
            c_hat,
            "largest c whose bound stays above every Wilson lower limit; absent when no grid point constrains it",
        );
        report.add_check(
            "c_hat_positive",
            CheckKind::Expectation,
            c_hat.is_none_or(|ch| ch > 0.0),
            format!("c_hat = {c_hat:?}"),
        );
        Ok(report)
    }
}
