//! Compressibility and flatness of least-singular eigenvectors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::*;
use crate::arithmetic::{compress_dist, flat_count};
use crate::ensembles::{sample_sym, Distribution};
use crate::spectral::eigen_sym;

/// Matrices per unit.
const SAMPLE_CHUNK: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditConfig {
    pub ensemble: Distribution,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub deltas: Vec<f64>,
    pub rhos: Vec<f64>,
    pub cs: Vec<f64>,
    /// The `(δ, ρ)` cell and `c` value tested by the expectation checks.
    pub target_delta: f64,
    pub target_rho: f64,
    pub target_c: f64,
    /// Required frequency at the target cells.
    pub target_frequency: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            ensemble: Distribution::rademacher(),
            n: 100,
            samples: 200,
            seed: 0,
            deltas: vec![0.05, 0.1, 0.2],
            rhos: vec![0.1, 0.3, 0.5],
            cs: vec![0.1, 0.2, 0.3],
            target_delta: 0.1,
            target_rho: 0.3,
            target_c: 0.2,
            target_frequency: 0.99,
        }
    }
}

impl ExperimentConfig for AuditConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        check_trials("samples", self.samples)?;
        if self.n < 2 {
            return config_err("n must be at least 2");
        }
        for (name, grid) in [("deltas", &self.deltas), ("rhos", &self.rhos), ("cs", &self.cs)] {
            check_grid(name, grid)?;
            for &x in grid.iter() {
                check_unit_interval(name, x, true)?;
            }
        }
        check_unit_interval("target_frequency", self.target_frequency, false)?;
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
pub struct AuditPartial {
    pub samples: u64,
    /// `incompressible[δ][ρ]`: counts of `compress_dist(v, δ) > ρ`.
    pub incompressible: Vec<Vec<u64>>,
    /// Counts of `flat_count(v, c) ≥ cn` per `c`.
    pub flat: Vec<u64>,
    /// Counts of `flat_count(v, c) ≥ n/2` per `c`.
    pub half_flat: Vec<u64>,
}

pub struct FlatnessAudit {
    cfg: AuditConfig,
}

impl Study for FlatnessAudit {
    type Config = AuditConfig;
    type Partial = AuditPartial;
    const NAME: &'static str = "audit";

    fn new(cfg: AuditConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    fn config(&self) -> &AuditConfig {
        &self.cfg
    }

    fn units(&self) -> usize {
        self.cfg.samples.div_ceil(SAMPLE_CHUNK)
    }

    fn run_unit(&self, index: usize) -> Result<AuditPartial, ExperimentError> {
        self.check_unit(index)?;
        let c = &self.cfg;
        let lo = index * SAMPLE_CHUNK;
        let hi = (lo + SAMPLE_CHUNK).min(c.samples);
        let vectors: Vec<Vec<f64>> = (lo as u64..hi as u64)
            .into_par_iter()
            .map(|t| {
                let a = sample_sym(&c.ensemble, c.n, sample_seed(c.seed, c.n, t))?;
                let s = eigen_sym(&a)?;
                Ok(s.eigenvector(s.least_singular_index()))
            })
            .collect::<Result<_, ExperimentError>>()?;
        let nf = c.n as f64;
        let incompressible = c
            .deltas
            .iter()
            .map(|&d| {
                let dists: Vec<f64> = vectors.iter().map(|v| compress_dist(v, d)).collect();
                c.rhos.iter().map(|&r| dists.iter().filter(|&&x| x > r).count() as u64).collect()
            })
            .collect();
        let counts: Vec<Vec<usize>> = c.cs.iter().map(|&cc| vectors.iter().map(|v| flat_count(v, cc)).collect()).collect();
        let flat = c
            .cs
            .iter()
            .zip(&counts)
            .map(|(&cc, k)| k.iter().filter(|&&m| m as f64 >= cc * nf).count() as u64)
            .collect();
        let half_flat = counts
            .iter()
            .map(|k| k.iter().filter(|&&m| 2 * m >= c.n).count() as u64)
            .collect();
        Ok(AuditPartial {
            samples: vectors.len() as u64,
            incompressible,
            flat,
            half_flat,
        })
    }

    fn assemble(&self, partials: Vec<AuditPartial>) -> Result<ExperimentReport, ExperimentError> {
        self.check_partials(&partials)?;
        let c = &self.cfg;
        let mut incompressible = vec![vec![0u64; c.rhos.len()]; c.deltas.len()];
        let mut flat = vec![0u64; c.cs.len()];
        let mut half_flat = vec![0u64; c.cs.len()];
        let mut samples = 0;
        for p in &partials {
            for (acc, row) in incompressible.iter_mut().zip(&p.incompressible) {
                add_counts(acc, row);
            }
            add_counts(&mut flat, &p.flat);
            add_counts(&mut half_flat, &p.half_flat);
            samples += p.samples;
        }
        let mut report = ExperimentReport::new(Self::NAME, self.config_json());

        let mut comp = Table::new("incompressible", &["delta", "rho", "hits", "trials", "p_hat", "ci_low", "ci_high"]);
        let mut target_incomp = None;
        for (di, &d) in c.deltas.iter().enumerate() {
            for (ri, &r) in c.rhos.iter().enumerate() {
                let e = estimate(incompressible[di][ri], samples);
                if d == c.target_delta && r == c.target_rho {
                    target_incomp = Some(e.p_hat);
                }
                let mut row = vec![Cell::num(d), Cell::num(r)];
                row.extend(estimate_cells(&e));
                comp.push(row);
            }
        }
        report.tables.push(comp);

        let mut fl = Table::new(
            "flat",
            &["c", "flat_hits", "half_flat_hits", "trials", "flat_p_hat", "half_flat_p_hat"],
        );
        let mut target_half = None;
        for (ci, &cc) in c.cs.iter().enumerate() {
            let h = half_flat[ci] as f64 / samples as f64;
            if cc == c.target_c {
                target_half = Some(h);
            }
            fl.push(vec![
                Cell::num(cc),
                Cell::int(flat[ci]),
                Cell::int(half_flat[ci]),
                Cell::int(samples),
                Cell::num(flat[ci] as f64 / samples as f64),
                Cell::num(h),
            ]);
        }
        report.tables.push(fl);

        // The sparse support always keeps at least one coordinate, enough for e₁.
        let mut e1 = vec![0.0; c.n];
        e1[0] = 1.0;
        let e1_ok = c.deltas.iter().all(|&d| compress_dist(&e1, d) == 0.0);
        report.add_check(
            "basis_vector_compressible",
            CheckKind::Invariant,
            e1_ok,
            "compress_dist(e_1, delta) = 0 for every delta in the sweep",
        );
        report.add_check(
            "incompressible_at_target",
            CheckKind::Expectation,
            target_incomp.is_some_and(|p| p >= c.target_frequency),
            format!(
                "incompressible fraction {} at delta = {}, rho = {} (required {})",
                fmt_opt(target_incomp),
                c.target_delta,
                c.target_rho,
                c.target_frequency
            ),
        );
        report.add_check(
            "half_flat_at_target",
            CheckKind::Expectation,
            target_half.is_some_and(|p| p >= c.target_frequency),
            format!(
                "fraction with flat_count >= n/2 is {} at c = {} (required {})",
                fmt_opt(target_half),
                c.target_c,
                c.target_frequency
            ),
        );
        Ok(report)
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "missing".into(), |v| format!("{v:.4}"))
}
