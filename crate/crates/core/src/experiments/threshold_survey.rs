//! The threshold `T_L(v)` of the block-zeroed matrix across a vector family.

use serde::{Deserialize, Serialize};

use super::vectors::expand_all;
use super::*;
use crate::ensembles::{Distribution, ZeroedMatrixParams};
use crate::smallball::{threshold_from_norms, zeroed_norms, ThresholdParams};
use crate::stats::log_grid_count;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub ensemble: Distribution,
    pub n: usize,
    /// Size of the nonzero block `H₁` is `(n − d) × d`.
    pub d: usize,
    pub nu: f64,
    /// Ascending values of `L ≥ 2`.
    pub l_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Ascending, in `(0, 1]`.
    pub t_grid: Vec<f64>,
    pub family: Vec<VectorSpec>,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            ensemble: Distribution::rademacher(),
            n: 12,
            d: 3,
            nu: 0.25,
            l_list: vec![2.0, 4.0, 8.0],
            trials: 20_000,
            seed: 0,
            t_grid: log_grid_count(1e-3, 1.0, 31),
            family: vec![
                VectorSpec::Constant,
                VectorSpec::TwoLevel { split: 0.5, ratio: 2.0 },
                VectorSpec::RandomUnit { count: 2, seed: 1 },
            ],
        }
    }
}

impl ThresholdConfig {
    fn zeroed(&self) -> Result<ZeroedMatrixParams, ExperimentError> {
        Ok(ZeroedMatrixParams::new(self.n, self.d, self.nu, self.ensemble.clone())?)
    }

    fn params(&self, l: f64) -> ThresholdParams {
        ThresholdParams {
            l,
            trials: self.trials,
            t_grid: self.t_grid.clone(),
        }
    }
}

impl ExperimentConfig for ThresholdConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        check_trials("trials", self.trials)?;
        self.zeroed()?;
        if self.l_list.is_empty() || self.l_list.windows(2).any(|w| w[0] >= w[1]) {
            return config_err("l_list must be nonempty and strictly ascending");
        }
        for &l in &self.l_list {
            self.params(l).validate()?;
        }
        expand_all(&self.family, self.n).map(|_| ())
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
            self.d = self.d.min(n / 3).max(1);
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdPartial {
    pub label: String,
    pub structured: bool,
    pub trials: u64,
    /// Counts of `‖Mv‖₂ ≤ t√n` per grid point.
    pub hits: Vec<u64>,
    /// `T_L` per entry of `l_list`.
    pub t_l: Vec<f64>,
}

pub struct ThresholdSurvey {
    cfg: ThresholdConfig,
    zeroed: ZeroedMatrixParams,
    vectors: Vec<LabeledVector>,
}

impl Study for ThresholdSurvey {
    type Config = ThresholdConfig;
    type Partial = ThresholdPartial;
    const NAME: &'static str = "threshold";

    fn new(cfg: ThresholdConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        let zeroed = cfg.zeroed()?;
        let vectors = expand_all(&cfg.family, cfg.n)?;
        Ok(Self { cfg, zeroed, vectors })
    }

    fn config(&self) -> &ThresholdConfig {
        &self.cfg
    }

    fn units(&self) -> usize {
        self.vectors.len()
    }

    fn run_unit(&self, index: usize) -> Result<ThresholdPartial, ExperimentError> {
        self.check_unit(index)?;
        let c = &self.cfg;
        let lv = &self.vectors[index];
        let seed = derive_key(c.seed, Domain::Unit, index as u64, 0);
        let norms = zeroed_norms(&lv.values, &self.zeroed, c.trials, seed)?;
        let mut hits = Vec::new();
        let mut t_l = Vec::new();
        for &l in &c.l_list {
            let r = threshold_from_norms(&norms, c.n, &c.params(l))?;
            if hits.is_empty() {
                hits = r.points.iter().map(|p| p.estimate.hits).collect();
            }
            t_l.push(r.t_l);
        }
        Ok(ThresholdPartial {
            label: lv.label.clone(),
            structured: lv.structured,
            trials: c.trials as u64,
            hits,
            t_l,
        })
    }

    fn assemble(&self, partials: Vec<ThresholdPartial>) -> Result<ExperimentReport, ExperimentError> {
        self.check_partials(&partials)?;
        let c = &self.cfg;
        let mut report = ExperimentReport::new(Self::NAME, self.config_json());
        let mut curve = Table::new("norm_cdf", &["vector", "t", "hits", "trials", "p_hat", "ci_low", "ci_high"]);
        let mut thresholds = Table::new("threshold", &["vector", "structured", "L", "t_L"]);
        let mut monotone = true;
        for p in &partials {
            let mut plot = Plot::new(&format!("norm_cdf_{}", p.label), "t", "p_hat", "none");
            for (&t, &h) in c.t_grid.iter().zip(&p.hits) {
                let e = estimate(h, p.trials);
                let mut row = vec![Cell::text(&p.label), Cell::num(t)];
                row.extend(estimate_cells(&e));
                curve.push(row);
                plot.push(t, e.p_hat, (e.ci_low, e.ci_high), None);
            }
            report.plots.push(plot);
            for (&l, &t) in c.l_list.iter().zip(&p.t_l) {
                thresholds.push(vec![
                    Cell::text(&p.label),
                    Cell::text(p.structured.to_string()),
                    Cell::num(l),
                    Cell::num(t),
                ]);
            }
            monotone &= p.t_l.windows(2).all(|w| w[1] <= w[0]);
        }
        report.tables.push(curve);
        report.tables.push(thresholds);
        report.add_check(
            "monotone_in_l",
            CheckKind::Invariant,
            monotone,
            "T_L never increases with L",
        );
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lazy_zero_gives_closed_form_threshold() {
        // With nu = 0 the matrix vanishes, so P = 1 and T_L is the last t below 1/(4L).
        let cfg = ThresholdConfig {
            nu: 0.0,
            trials: 100,
            l_list: vec![2.0, 4.0],
            t_grid: vec![0.05, 0.1, 0.125, 0.2],
            family: vec![VectorSpec::Constant],
            ..ThresholdConfig::default()
        };
        let report = run_config::<ThresholdSurvey>(cfg).unwrap();
        let t = report.table("threshold").unwrap().column("t_L");
        assert_eq!(t, vec![0.1, 0.05]);
        assert!(report.failed_invariants().is_empty());
    }
}
