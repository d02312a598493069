//! Small ball of `⟨X, v⟩` conditioned on `‖WX‖₂` being small, for lazy `X`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::vectors::orthonormal_rows;
use super::*;
use crate::arithmetic::{l2_norm, lcd, LcdParams};
use crate::ensembles::sample_lazy_pm1;
use crate::stats::{least_squares, log_log_fit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvLwoConfig {
    pub d: usize,
    /// `P(X_i = ±1) = ν/2`; at most 1/4.
    pub nu: f64,
    pub trials: usize,
    pub seed: u64,
    pub vector: VectorSpec,
    /// Seed of the orthonormal rows of `W`. Row sets are nested in `k`.
    pub w_seed: u64,
    pub k_list: Vec<usize>,
    pub eps_grid: Vec<f64>,
    pub c2: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub lcd_cap: f64,
    /// Precondition `D(v) > lcd_constant/ε`.
    pub lcd_constant: f64,
}

impl Default for InvLwoConfig {
    fn default() -> Self {
        Self {
            d: 128,
            nu: 0.25,
            trials: 20_000,
            seed: 0,
            vector: VectorSpec::RandomUnit { count: 1, seed: 1 },
            w_seed: 2,
            k_list: vec![0, 2, 4, 8, 16],
            eps_grid: vec![0.05, 0.1, 0.2, 0.4],
            c2: 0.3,
            alpha: 0.01,
            gamma: 0.1,
            lcd_cap: 1e4,
            lcd_constant: 16.0,
        }
    }
}

impl ExperimentConfig for InvLwoConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        check_trials("trials", self.trials)?;
        check_grid("eps_grid", &self.eps_grid)?;
        if !(self.nu > 0.0 && self.nu <= 0.25) {
            return config_err("nu must lie in (0, 1/4] so that P(X_i = 0) >= 3/4");
        }
        if self.k_list.windows(2).any(|w| w[0] >= w[1]) {
            return config_err("k_list must be strictly ascending");
        }
        if self.k_list.last().is_some_and(|&k| k >= self.d) {
            return config_err("k must be smaller than d");
        }
        if !(self.c2 > 0.0) {
            return config_err("c2 must be positive");
        }
        LcdParams::new(self.alpha, self.gamma).with_cap(self.lcd_cap).validate()?;
        let vs = self.vector.expand(self.d)?;
        if vs.len() != 1 || l2_norm(&vs[0].values) == 0.0 {
            return config_err("vector must describe exactly one nonzero vector");
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
            self.d = n;
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvLwoPartial {
    pub trials: u64,
    /// `joint[ε index][k index]`.
    pub joint: Vec<Vec<u64>>,
}

pub struct CondInvLwo {
    cfg: InvLwoConfig,
    v: Vec<f64>,
    w: Vec<Vec<f64>>,
}

impl Study for CondInvLwo {
    type Config = InvLwoConfig;
    type Partial = InvLwoPartial;
    const NAME: &'static str = "invlwo";

    fn new(cfg: InvLwoConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        let v = super::vectors::normalized(&cfg.vector.expand(cfg.d)?.remove(0).values);
        let kmax = cfg.k_list.last().copied().unwrap_or(0);
        let w = orthonormal_rows(kmax, cfg.d, cfg.w_seed, &[])?;
        Ok(Self { cfg, v, w })
    }

    fn config(&self) -> &InvLwoConfig {
        &self.cfg
    }

    fn units(&self) -> usize {
        chunk_count(self.cfg.trials)
    }

    fn run_unit(&self, index: usize) -> Result<InvLwoPartial, ExperimentError> {
        self.check_unit(index)?;
        let c = &self.cfg;
        // Per trial: |⟨X, v⟩| and whether ‖W_k X‖ ≤ c₂√k for each k.
        let draws: Vec<(f64, Vec<bool>)> = chunk_range(index, c.trials)
            .into_par_iter()
            .map(|t| {
                let x = sample_lazy_pm1(c.d, c.nu, sample_seed(c.seed, c.d, t))?;
                let a: f64 = x.iter().zip(&self.v).map(|(p, q)| p * q).sum();
                let mut prefix = Vec::with_capacity(self.w.len() + 1);
                prefix.push(0.0);
                for row in &self.w {
                    let p: f64 = row.iter().zip(&x).map(|(r, y)| r * y).sum();
                    prefix.push(prefix.last().copied().unwrap_or(0.0) + p * p);
                }
                let small = c
                    .k_list
                    .iter()
                    .map(|&k| prefix[k].sqrt() <= c.c2 * (k as f64).sqrt())
                    .collect();
                Ok((a.abs(), small))
            })
            .collect::<Result<_, ExperimentError>>()?;
        let joint = c
            .eps_grid
            .iter()
            .map(|&e| {
                (0..c.k_list.len())
                    .map(|ki| draws.iter().filter(|d| d.0 <= e && d.1[ki]).count() as u64)
                    .collect()
            })
            .collect();
        Ok(InvLwoPartial {
            trials: draws.len() as u64,
            joint,
        })
    }

    fn assemble(&self, partials: Vec<InvLwoPartial>) -> Result<ExperimentReport, ExperimentError> {
        self.check_partials(&partials)?;
        let c = &self.cfg;
        let nk = c.k_list.len();
        let mut joint = vec![vec![0u64; nk]; c.eps_grid.len()];
        let mut trials = 0;
        for p in &partials {
            for (acc, j) in joint.iter_mut().zip(&p.joint) {
                add_counts(acc, j);
            }
            trials += p.trials;
        }
        let mut report = ExperimentReport::new(Self::NAME, self.config_json());

        let params = LcdParams::new(c.alpha, c.gamma).with_cap(c.lcd_cap);
        let d = lcd(&self.v, &params)?;
        let needed = c.eps_grid.first().map_or(0.0, |&e| c.lcd_constant / e);
        let mut lcd_table = Table::new("lcd", &["lcd_bound", "finite", "required"]);
        lcd_table.push(vec![
            Cell::num(d.value.bound()),
            Cell::text(d.value.is_finite().to_string()),
            Cell::num(needed),
        ]);
        report.tables.push(lcd_table);
        report.add_check(
            "lcd_precondition",
            CheckKind::Expectation,
            d.value.bound() > needed,
            format!("D(v) >= {:.4e} against lcd_constant/eps_min = {needed:.4e}", d.value.bound()),
        );

        let mut table = Table::new("joint", &["epsilon", "k", "hits", "trials", "p_hat", "ci_low", "ci_high"]);
        let mut decreasing = true;
        let ks: Vec<f64> = c.k_list.iter().map(|&k| k as f64).collect();
        for (ei, &eps) in c.eps_grid.iter().enumerate() {
            let est: Vec<_> = joint[ei].iter().map(|&h| estimate(h, trials)).collect();
            let mut plot = Plot::new(&format!("decay_eps_{ei}"), "k", "p_hat", "none");
            for (ki, e) in est.iter().enumerate() {
                let mut row = vec![Cell::num(eps), Cell::int(c.k_list[ki])];
                row.extend(estimate_cells(e));
                table.push(row);
                plot.push(ks[ki], e.p_hat, (e.ci_low, e.ci_high), None);
            }
            report.plots.push(plot);
            decreasing &= joint[ei].windows(2).all(|w| w[1] < w[0]);
            let (x, y): (Vec<f64>, Vec<f64>) = ks
                .iter()
                .zip(&est)
                .filter(|(_, e)| e.hits > 0)
                .map(|(&k, e)| (k, e.p_hat.ln()))
                .unzip();
            if let Some(f) = least_squares(&x, &y) {
                report.fits.push(Fit::from_linear(&format!("log_p_vs_k_eps_{ei}"), f));
            }
        }
        for (ki, &k) in c.k_list.iter().enumerate() {
            let p: Vec<f64> = (0..c.eps_grid.len()).map(|ei| joint[ei][ki] as f64 / trials as f64).collect();
            if let Some(f) = least_squares(&c.eps_grid, &p) {
                report.fits.push(Fit::from_linear(&format!("p_vs_eps_k{k}"), f));
            }
            if let Some(f) = log_log_fit(&c.eps_grid, &p) {
                report.fits.push(Fit::from_linear(&format!("loglog_p_vs_eps_k{k}"), f));
            }
        }
        report.tables.push(table);
        report.add_check(
            "strictly_decreasing_in_k",
            CheckKind::Expectation,
            decreasing,
            "joint counts strictly decrease along k_list at every epsilon",
        );
        Ok(report)
    }
}
