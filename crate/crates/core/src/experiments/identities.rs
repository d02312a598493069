//! Deterministic linear-algebra identities on random matrices: the distance
//! formula for the first column, the column bound on `σ_min`, the eigenvector
//! perturbation inequality and Cauchy interlacing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::*;
use crate::ensembles::{sample_sym, Distribution};
use crate::rng::{derive_key, Domain};
use crate::spectral::{
    dist_identity_check, interlacing_violation, perturbation_check, sigma_min_lower_check, PairSelection, SpectralError,
};

/// Matrices per unit in the inequality part.
const FACT_CHUNK: usize = 250;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistIdConfig {
    pub ensemble: Distribution,
    /// Sizes `n + 1` of the matrices for the distance identity.
    pub sizes: Vec<usize>,
    /// Matrices per size.
    pub trials: usize,
    pub seed: u64,
    /// Size and count of the matrices for the inequalities.
    pub fact_n: usize,
    pub fact_trials: usize,
    pub tol: f64,
}

impl Default for DistIdConfig {
    fn default() -> Self {
        Self {
            ensemble: Distribution::rademacher(),
            sizes: vec![8, 16, 32, 64],
            trials: 1000,
            seed: 0,
            fact_n: 10,
            fact_trials: 1000,
            tol: 1e-6,
        }
    }
}

impl ExperimentConfig for DistIdConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        check_trials("trials", self.trials)?;
        check_trials("fact_trials", self.fact_trials)?;
        if self.sizes.iter().any(|&s| s < 2) {
            return config_err("sizes must be at least 2");
        }
        if self.fact_n < 2 {
            return config_err("fact_n must be at least 2");
        }
        if !(self.tol > 0.0) {
            return config_err("tol must be positive");
        }
        Ok(())
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.trials {
            self.trials = t;
            self.fact_trials = t;
        }
        if let Some(n) = o.n {
            self.sizes = vec![n];
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IdentityPartial {
    Distance {
        size: usize,
        checked: u64,
        singular: u64,
        max_abs_err: f64,
        max_rel_err: f64,
    },
    Inequalities {
        matrices: u64,
        column_bound_violations: u64,
        all_pairs_violations: u64,
        least_pair_violations: u64,
        pairs_checked: u64,
        pairs_skipped: u64,
        max_ratio_all: f64,
        max_ratio_least: f64,
        max_interlacing: f64,
    },
}

pub struct Identities {
    cfg: DistIdConfig,
}

impl Identities {
    fn fact_units(&self) -> usize {
        self.cfg.fact_trials.div_ceil(FACT_CHUNK)
    }

    fn distance_unit(&self, size: usize) -> Result<IdentityPartial, ExperimentError> {
        let c = &self.cfg;
        let results: Vec<Option<(f64, f64)>> = (0..c.trials as u64)
            .into_par_iter()
            .map(|t| {
                let a = sample_sym(&c.ensemble, size, sample_seed(c.seed, size, t))?;
                match dist_identity_check(&a) {
                    Ok(d) => Ok(Some((d.abs_err, d.abs_err / d.lhs.max(1e-300)))),
                    Err(SpectralError::SingularMinor { .. }) => Ok(None),
                    Err(e) => Err(e.into()),
                }
            })
            .collect::<Result<_, ExperimentError>>()?;
        let ok: Vec<(f64, f64)> = results.iter().flatten().copied().collect();
        Ok(IdentityPartial::Distance {
            size,
            checked: ok.len() as u64,
            singular: (results.len() - ok.len()) as u64,
            max_abs_err: ok.iter().map(|r| r.0).fold(0.0, f64::max),
            max_rel_err: ok.iter().map(|r| r.1).fold(0.0, f64::max),
        })
    }

    fn inequality_unit(&self, chunk: usize) -> Result<IdentityPartial, ExperimentError> {
        let c = &self.cfg;
        let n = c.fact_n;
        let lo = chunk * FACT_CHUNK;
        let hi = (lo + FACT_CHUNK).min(c.fact_trials);
        struct One {
            column: bool,
            all: (u64, u64, u64, f64),
            least: (u64, f64),
            interlacing: f64,
        }
        let per: Vec<One> = (lo as u64..hi as u64)
            .into_par_iter()
            .map(|t| {
                let a = sample_sym(&c.ensemble, n, derive_key(c.seed, Domain::Auxiliary, t, n as u64))?;
                let column = sigma_min_lower_check(&a)?.holds;
                let mut one = One {
                    column,
                    all: (0, 0, 0, 0.0),
                    least: (0, 0.0),
                    interlacing: 0.0,
                };
                for j in 0..n {
                    let r = perturbation_check(&a, j, PairSelection::All)?;
                    one.all.0 += r.violations as u64;
                    one.all.1 += r.pairs_checked as u64;
                    one.all.2 += r.pairs_skipped as u64;
                    one.all.3 = one.all.3.max(r.max_ratio);
                    let l = perturbation_check(&a, j, PairSelection::LeastSingular)?;
                    one.least.0 += l.violations as u64;
                    one.least.1 = one.least.1.max(l.max_ratio);
                    one.interlacing = one.interlacing.max(interlacing_violation(&a, j)?);
                }
                Ok(one)
            })
            .collect::<Result<_, ExperimentError>>()?;
        Ok(IdentityPartial::Inequalities {
            matrices: per.len() as u64,
            column_bound_violations: per.iter().filter(|o| !o.column).count() as u64,
            all_pairs_violations: per.iter().map(|o| o.all.0).sum(),
            least_pair_violations: per.iter().map(|o| o.least.0).sum(),
            pairs_checked: per.iter().map(|o| o.all.1).sum(),
            pairs_skipped: per.iter().map(|o| o.all.2).sum(),
            max_ratio_all: per.iter().map(|o| o.all.3).fold(0.0, f64::max).min(f64::MAX),
            max_ratio_least: per.iter().map(|o| o.least.1).fold(0.0, f64::max).min(f64::MAX),
            max_interlacing: per.iter().map(|o| o.interlacing).fold(0.0, f64::max),
        })
    }
}

impl Study for Identities {
    type Config = DistIdConfig;
    type Partial = IdentityPartial;
    const NAME: &'static str = "distid";

    fn new(cfg: DistIdConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    fn config(&self) -> &DistIdConfig {
        &self.cfg
    }

    fn units(&self) -> usize {
        self.cfg.sizes.len() + self.fact_units()
    }

    fn run_unit(&self, index: usize) -> Result<IdentityPartial, ExperimentError> {
        self.check_unit(index)?;
        match self.cfg.sizes.get(index) {
            Some(&size) => self.distance_unit(size),
            None => self.inequality_unit(index - self.cfg.sizes.len()),
        }
    }

    fn assemble(&self, partials: Vec<IdentityPartial>) -> Result<ExperimentReport, ExperimentError> {
        self.check_partials(&partials)?;
        let c = &self.cfg;
        let mut report = ExperimentReport::new(Self::NAME, self.config_json());
        let mut dist = Table::new("distance_identity", &["size", "checked", "singular", "max_abs_err", "max_rel_err"]);
        let (mut worst, mut singular, mut total) = (0.0f64, 0u64, 0u64);
        let mut ineq = (0u64, 0u64, 0u64, 0u64, 0u64, 0u64, 0.0f64, 0.0f64, 0.0f64);
        for p in &partials {
            match *p {
                IdentityPartial::Distance {
                    size,
                    checked,
                    singular: s,
                    max_abs_err,
                    max_rel_err,
                } => {
                    worst = worst.max(max_abs_err);
                    singular += s;
                    total += checked + s;
                    dist.push(vec![
                        Cell::int(size),
                        Cell::int(checked),
                        Cell::int(s),
                        Cell::num(max_abs_err),
                        Cell::num(max_rel_err),
                    ]);
                }
                IdentityPartial::Inequalities {
                    matrices,
                    column_bound_violations,
                    all_pairs_violations,
                    least_pair_violations,
                    pairs_checked,
                    pairs_skipped,
                    max_ratio_all,
                    max_ratio_least,
                    max_interlacing,
                } => {
                    ineq.0 += matrices;
                    ineq.1 += column_bound_violations;
                    ineq.2 += all_pairs_violations;
                    ineq.3 += least_pair_violations;
                    ineq.4 += pairs_checked;
                    ineq.5 += pairs_skipped;
                    ineq.6 = ineq.6.max(max_ratio_all);
                    ineq.7 = ineq.7.max(max_ratio_least);
                    ineq.8 = ineq.8.max(max_interlacing);
                }
            }
        }
        report.tables.push(dist);
        let mut t = Table::new(
            "inequalities",
            &[
                "n", "matrices", "column_bound_violations", "all_pairs_violations", "least_pair_violations",
                "pairs_checked", "pairs_skipped", "max_ratio_all", "max_ratio_least", "max_interlacing",
            ],
        );
        t.push(vec![
            Cell::int(c.fact_n),
            Cell::int(ineq.0),
            Cell::int(ineq.1),
            Cell::int(ineq.2),
            Cell::int(ineq.3),
            Cell::int(ineq.4),
            Cell::int(ineq.5),
            Cell::num(ineq.6),
            Cell::num(ineq.7),
            Cell::num(ineq.8),
        ]);
        report.tables.push(t);
        report.add_exclusion("singular_minor", singular, total, "minor with sigma_min below 1e-10 sqrt(n)");
        report.add_check(
            "distance_identity",
            CheckKind::Invariant,
            worst <= c.tol,
            format!("max |d_1 - formula| = {worst:.3e}, tolerance {:e}", c.tol),
        );
        report.add_check(
            "sigma_min_column_bound",
            CheckKind::Invariant,
            ineq.1 == 0,
            format!("{} violations of sigma_min >= |v_j| d_j", ineq.1),
        );
        report.add_check(
            "perturbation_all_pairs",
            CheckKind::Invariant,
            ineq.2 == 0,
            format!("{} violations over {} pairs ({} skipped)", ineq.2, ineq.4, ineq.5),
        );
        report.add_check(
            "perturbation_least_singular",
            CheckKind::Invariant,
            ineq.3 == 0,
            format!("{} violations", ineq.3),
        );
        report.add_check(
            "interlacing",
            CheckKind::Invariant,
            ineq.8 <= 1e-8,
            format!("largest interlacing violation {:.3e}", ineq.8),
        );
        Ok(report)
    }
}
