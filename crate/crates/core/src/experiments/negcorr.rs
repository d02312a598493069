//! Joint small-ball and large-deviation events of two linear forms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::vectors::{normalized, orthonormal_rows, random_unit};
use super::*;
use crate::arithmetic::{l2_norm, lcd, LcdParams};
use crate::ensembles::{sample_col, Distribution};
use crate::stats::wilson;

/// The pair `(v, u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PairSpec {
    /// Random unit `v` and a random unit `u ⊥ v`.
    RandomOrthogonal { seed: u64 },
    /// Both vectors are normalized.
    Explicit { v: Vec<f64>, u: Vec<f64> },
}

impl PairSpec {
    pub fn build(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>), ExperimentError> {
        match self {
            PairSpec::RandomOrthogonal { seed } => {
                let v = random_unit(n, *seed, 0);
                let u = orthonormal_rows(1, n, *seed, std::slice::from_ref(&v))?.remove(0);
                Ok((v, u))
            }
            PairSpec::Explicit { v, u } => {
                if v.len() != n || u.len() != n {
                    return config_err(format!("pair vectors must have length {n}"));
                }
                if !(l2_norm(v) > 0.0 && l2_norm(u) > 0.0) {
                    return config_err("pair vectors must be nonzero");
                }
                Ok((normalized(v), normalized(u)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NegCorrConfig {
    pub ensemble: Distribution,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub pair: PairSpec,
    pub eps_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// LCD parameters for the precondition `D(v) > lcd_constant/ε`.
    pub alpha: f64,
    pub gamma: f64,
    pub lcd_cap: f64,
    pub lcd_constant: f64,
}

impl Default for NegCorrConfig {
    fn default() -> Self {
        Self {
            ensemble: Distribution::rademacher(),
            n: 64,
            trials: 20_000,
            seed: 0,
            pair: PairSpec::RandomOrthogonal { seed: 1 },
            eps_grid: vec![0.02, 0.05, 0.1, 0.2],
            t_grid: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            alpha: 0.01,
            gamma: 0.1,
            lcd_cap: 1e4,
            lcd_constant: 1.0,
        }
    }
}

impl ExperimentConfig for NegCorrConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        check_trials("trials", self.trials)?;
        check_grid("eps_grid", &self.eps_grid)?;
        check_grid("t_grid", &self.t_grid)?;
        LcdParams::new(self.alpha, self.gamma).with_cap(self.lcd_cap).validate()?;
        self.pair.build(self.n).map(|_| ())
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
pub struct NegCorrPartial {
    pub trials: u64,
    pub small: Vec<u64>,
    pub deviation: Vec<u64>,
    /// `joint[ε index][t index]`.
    pub joint: Vec<Vec<u64>>,
}

pub struct NegCorr {
    cfg: NegCorrConfig,
    v: Vec<f64>,
    u: Vec<f64>,
}

impl Study for NegCorr {
    type Config = NegCorrConfig;
    type Partial = NegCorrPartial;
    const NAME: &'static str = "negcorr";

    fn new(cfg: NegCorrConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        let (v, u) = cfg.pair.build(cfg.n)?;
        Ok(Self { cfg, v, u })
    }

    fn config(&self) -> &NegCorrConfig {
        &self.cfg
    }

    fn units(&self) -> usize {
        chunk_count(self.cfg.trials)
    }

    fn run_unit(&self, index: usize) -> Result<NegCorrPartial, ExperimentError> {
        self.check_unit(index)?;
        let c = &self.cfg;
        let forms: Vec<(f64, f64)> = chunk_range(index, c.trials)
            .into_par_iter()
            .map(|t| {
                let x = sample_col(&c.ensemble, c.n, sample_seed(c.seed, c.n, t))?;
                let a: f64 = x.iter().zip(&self.v).map(|(p, q)| p * q).sum();
                let b: f64 = x.iter().zip(&self.u).map(|(p, q)| p * q).sum();
                Ok((a, b))
            })
            .collect::<Result<_, ExperimentError>>()?;
        let small = c
            .eps_grid
            .iter()
            .map(|&e| forms.iter().filter(|f| f.0.abs() <= e).count() as u64)
            .collect();
        let deviation = c
            .t_grid
            .iter()
            .map(|&t| forms.iter().filter(|f| f.1 > t).count() as u64)
            .collect();
        let joint = c
            .eps_grid
            .iter()
            .map(|&e| {
                c.t_grid
                    .iter()
                    .map(|&t| forms.iter().filter(|f| f.0.abs() <= e && f.1 > t).count() as u64)
                    .collect()
            })
            .collect();
        Ok(NegCorrPartial {
            trials: forms.len() as u64,
            small,
            deviation,
            joint,
        })
    }

    fn assemble(&self, partials: Vec<NegCorrPartial>) -> Result<ExperimentReport, ExperimentError> {
        self.check_partials(&partials)?;
        let c = &self.cfg;
        let (ne, nt) = (c.eps_grid.len(), c.t_grid.len());
        let (mut small, mut dev, mut joint, mut trials) = (vec![0u64; ne], vec![0u64; nt], vec![vec![0u64; nt]; ne], 0u64);
        for p in &partials {
            add_counts(&mut small, &p.small);
            add_counts(&mut dev, &p.deviation);
            for (acc, j) in joint.iter_mut().zip(&p.joint) {
                add_counts(acc, j);
            }
            trials += p.trials;
        }
        let nn = trials as f64;
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

        let mut table = Table::new(
            "neg_corr",
            &[
                "epsilon", "t", "joint_hits", "small_hits", "deviation_hits", "trials", "p_joint", "p_small",
                "p_deviation", "ratio", "ratio_low", "ratio_high",
            ],
        );
        let mut c_hat: Option<f64> = None;
        let mut outside = 0usize;
        for (ei, &eps) in c.eps_grid.iter().enumerate() {
            let mut plot = Plot::new(&format!("ratio_eps_{ei}"), "t", "ratio", "independent");
            for (ti, &t) in c.t_grid.iter().enumerate() {
                let (j, s, v) = (joint[ei][ti], small[ei], dev[ti]);
                let (pj, ps, pv) = (j as f64 / nn, s as f64 / nn, v as f64 / nn);
                let (jl, jh) = wilson(j, trials);
                let (sl, sh) = wilson(s, trials);
                let (vl, vh) = wilson(v, trials);
                let ratio = (s > 0 && v > 0).then(|| pj / (ps * pv));
                // Conservative interval from the three Wilson intervals.
                let lo = jl / (sh * vh);
                let hi = if sl > 0.0 && vl > 0.0 { jh / (sl * vl) } else { f64::INFINITY };
                if let Some(r) = ratio.filter(|_| j > 0) {
                    c_hat = Some(c_hat.map_or(r, |m: f64| m.max(r)));
                }
                if ratio.is_some() && !(lo <= 1.0 && 1.0 <= hi) {
                    outside += 1;
                }
                table.push(vec![
                    Cell::num(eps),
                    Cell::num(t),
                    Cell::int(j),
                    Cell::int(s),
                    Cell::int(v),
                    Cell::int(trials),
                    Cell::num(pj),
                    Cell::num(ps),
                    Cell::num(pv),
                    Cell::opt(ratio),
                    Cell::num(lo),
                    Cell::num(hi),
                ]);
                if let Some(r) = ratio {
                    plot.push(t, r, (lo, hi.min(f64::MAX)), Some(1.0));
                }
            }
            report.plots.push(plot);
        }
        report.tables.push(table);
        report.add_constant("C_hat", c_hat, "max over the grid of p_joint / (p_small p_deviation)");
        report.add_check(
            "ratio_ci_contains_one",
            CheckKind::Expectation,
            outside == 0,
            format!("{outside} grid cells whose ratio interval excludes 1"),
        );
        Ok(report)
    }
}
