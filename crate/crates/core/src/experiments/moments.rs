//! Moments of `√n/(μ_k k)` and of the distortion `‖A⁻¹‖_*/μ₁`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::*;
use crate::ensembles::{sample_sym, Distribution};
use crate::spectral::{eigenvalues_sym, SingularProfile};
use crate::stats::{log_grid, log_log_fit, wilson, Z95};

const SAMPLE_CHUNK: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsConfig {
    pub ensemble: Distribution,
    pub n_list: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub k_list: Vec<usize>,
    /// Powers in `{1, 2}`.
    pub powers: Vec<u32>,
    /// Levels `s` of the tail curves.
    pub s_grid: Vec<f64>,
    /// Largest accepted ratio of consecutive means along `n_list`.
    pub growth_tol: f64,
    /// Bound expected for the mean distortion.
    pub distortion_tol: f64,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        Self {
            ensemble: Distribution::rademacher(),
            n_list: vec![50, 100, 200],
            samples: 500,
            seed: 0,
            k_list: vec![5],
            powers: vec![1, 2],
            s_grid: log_grid(1.0, 8.0, 4),
            growth_tol: 1.25,
            distortion_tol: 5.0,
        }
    }
}

impl ExperimentConfig for MomentsConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        check_trials("samples", self.samples)?;
        check_grid("s_grid", &self.s_grid)?;
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return config_err("n_list must be nonempty and strictly ascending");
        }
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return config_err("k_list must be nonempty and positive");
        }
        let kmax = *self.k_list.iter().max().expect("nonempty");
        if 4 * kmax > self.n_list[0] {
            return config_err(format!("k = {kmax} exceeds n/4 for n = {}", self.n_list[0]));
        }
        if self.powers.is_empty() || self.powers.iter().any(|p| !(1..=2).contains(p)) {
            return config_err("powers must be drawn from {1, 2}");
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
            self.n_list = vec![n];
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentsPartial {
    pub n: usize,
    pub samples: u64,
    pub singular: u64,
    /// `[k][power]` sums of `x^p` and `x^{2p}` for `x = √n σ_{n−k+1}/k`.
    pub sum: Vec<Vec<f64>>,
    pub sum_sq: Vec<Vec<f64>>,
    /// `[power]` sums for the distortion.
    pub dist_sum: Vec<f64>,
    pub dist_sum_sq: Vec<f64>,
    /// `[k][s]` counts of `x ≥ s` and of `1/x ≥ s`.
    pub tail: Vec<Vec<u64>>,
    pub inverse_tail: Vec<Vec<u64>>,
}

pub struct SpectralMoments {
    cfg: MomentsConfig,
}

impl SpectralMoments {
    fn locate(&self, index: usize) -> (usize, usize) {
        let per = self.cfg.samples.div_ceil(SAMPLE_CHUNK);
        (index / per, index % per)
    }
}

struct Sample {
    xs: Vec<f64>,
    distortion: f64,
}

impl Study for SpectralMoments {
    type Config = MomentsConfig;
    type Partial = MomentsPartial;
    const NAME: &'static str = "moments";

    fn new(cfg: MomentsConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    fn config(&self) -> &MomentsConfig {
        &self.cfg
    }

    fn units(&self) -> usize {
        self.cfg.n_list.len() * self.cfg.samples.div_ceil(SAMPLE_CHUNK)
    }

    fn run_unit(&self, index: usize) -> Result<MomentsPartial, ExperimentError> {
        self.check_unit(index)?;
        let c = &self.cfg;
        let (ni, chunk) = self.locate(index);
        let n = c.n_list[ni];
        let root_n = (n as f64).sqrt();
        let lo = chunk * SAMPLE_CHUNK;
        let hi = (lo + SAMPLE_CHUNK).min(c.samples);
        let draws: Vec<Option<Sample>> = (lo as u64..hi as u64)
            .into_par_iter()
            .map(|s| {
                let a = sample_sym(&c.ensemble, n, sample_seed(c.seed, n, s))?;
                let prof = SingularProfile::from_eigenvalues(&eigenvalues_sym(&a)?);
                if prof.is_singular() {
                    return Ok(None);
                }
                let xs = c.k_list.iter().map(|&k| root_n * prof.sigma(n - k + 1) / k as f64).collect();
                let distortion = prof.inverse_norm_star()? / prof.mu(1);
                Ok(Some(Sample { xs, distortion }))
            })
            .collect::<Result<_, ExperimentError>>()?;

        let (nk, np, ns) = (c.k_list.len(), c.powers.len(), c.s_grid.len());
        let mut part = MomentsPartial {
            n,
            samples: draws.len() as u64,
            singular: draws.iter().filter(|d| d.is_none()).count() as u64,
            sum: vec![vec![0.0; np]; nk],
            sum_sq: vec![vec![0.0; np]; nk],
            dist_sum: vec![0.0; np],
            dist_sum_sq: vec![0.0; np],
            tail: vec![vec![0; ns]; nk],
            inverse_tail: vec![vec![0; ns]; nk],
        };
        for d in draws.iter().flatten() {
            for (pi, &p) in c.powers.iter().enumerate() {
                for ki in 0..nk {
                    let v = d.xs[ki].powi(p as i32);
                    part.sum[ki][pi] += v;
                    part.sum_sq[ki][pi] += v * v;
                }
                let v = d.distortion.powi(p as i32);
                part.dist_sum[pi] += v;
                part.dist_sum_sq[pi] += v * v;
            }
            for ki in 0..nk {
                for (si, &s) in c.s_grid.iter().enumerate() {
                    part.tail[ki][si] += u64::from(d.xs[ki] >= s);
                    part.inverse_tail[ki][si] += u64::from(1.0 / d.xs[ki] >= s);
                }
            }
        }
        Ok(part)
    }

    fn assemble(&self, partials: Vec<MomentsPartial>) -> Result<ExperimentReport, ExperimentError> {
        self.check_partials(&partials)?;
        let c = &self.cfg;
        let (nk, np, ns) = (c.k_list.len(), c.powers.len(), c.s_grid.len());
        let mut report = ExperimentReport::new(Self::NAME, self.config_json());
        let mut moments = Table::new("moments", &["n", "k", "p", "samples", "mean", "se", "ci_low", "ci_high"]);
        let mut distortion = Table::new("distortion", &["n", "p", "samples", "mean", "se"]);
        let mut tails = Table::new("tail", &["n", "k", "s", "hits", "trials", "p_hat", "ci_low", "ci_high", "kind"]);
        // means[k][p][n index] as (mean, se), distortion_means[p][n index]
        let mut means = vec![vec![Vec::new(); np]; nk];
        let mut dist_means = vec![Vec::new(); np];

        let mean_se = |sum: f64, sum_sq: f64, m: f64| {
            let mean = sum / m;
            let var = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
            (mean, (var / m).sqrt())
        };

        for &n in &c.n_list {
            let group: Vec<&MomentsPartial> = partials.iter().filter(|p| p.n == n).collect();
            let samples: u64 = group.iter().map(|p| p.samples).sum();
            let singular: u64 = group.iter().map(|p| p.singular).sum();
            let used = samples - singular;
            report.add_exclusion(
                &format!("singular_n{n}"),
                singular,
                samples,
                "sigma_min below 1e-10 sqrt(n); left out of inverse statistics",
            );
            let m = used as f64;
            for pi in 0..np {
                let p = c.powers[pi];
                for ki in 0..nk {
                    let s: f64 = group.iter().map(|g| g.sum[ki][pi]).sum();
                    let s2: f64 = group.iter().map(|g| g.sum_sq[ki][pi]).sum();
                    let (mean, se) = mean_se(s, s2, m);
                    means[ki][pi].push((mean, se));
                    moments.push(vec![
                        Cell::int(n),
                        Cell::int(c.k_list[ki]),
                        Cell::int(p),
                        Cell::int(used),
                        Cell::num(mean),
                        Cell::num(se),
                        Cell::num(mean - Z95 * se),
                        Cell::num(mean + Z95 * se),
                    ]);
                }
                let s: f64 = group.iter().map(|g| g.dist_sum[pi]).sum();
                let s2: f64 = group.iter().map(|g| g.dist_sum_sq[pi]).sum();
                let (mean, se) = mean_se(s, s2, m);
                dist_means[pi].push(mean);
                distortion.push(vec![Cell::int(n), Cell::int(p), Cell::int(used), Cell::num(mean), Cell::num(se)]);
            }
            for ki in 0..nk {
                for si in 0..ns {
                    for kind in ["upper", "inverse"] {
                        let hits: u64 = group
                            .iter()
                            .map(|g| if kind == "upper" { g.tail[ki][si] } else { g.inverse_tail[ki][si] })
                            .sum();
                        let (lo, hi) = wilson(hits, used.max(1));
                        tails.push(vec![
                            Cell::int(n),
                            Cell::int(c.k_list[ki]),
                            Cell::num(c.s_grid[si]),
                            Cell::int(hits),
                            Cell::int(used),
                            Cell::num(hits as f64 / used.max(1) as f64),
                            Cell::num(lo),
                            Cell::num(hi),
                            Cell::text(kind),
                        ]);
                    }
                }
            }
        }
        report.tables.push(moments);
        report.tables.push(distortion);
        report.tables.push(tails);

        let ns_f: Vec<f64> = c.n_list.iter().map(|&n| n as f64).collect();
        for (ki, &k) in c.k_list.iter().enumerate() {
            for (pi, &p) in c.powers.iter().enumerate() {
                let ms: Vec<f64> = means[ki][pi].iter().map(|m| m.0).collect();
                let mut plot = Plot::new(&format!("moment_k{k}_p{p}"), "n", "mean", "none");
                for (x, &(y, se)) in ns_f.iter().zip(&means[ki][pi]) {
                    plot.push(*x, y, (y - Z95 * se, y + Z95 * se), None);
                }
                report.plots.push(plot);
                if let Some(f) = log_log_fit(&ns_f, &ms) {
                    report.fits.push(Fit::from_linear(&format!("trend_k{k}_p{p}"), f));
                }
                if p == 1 {
                    let worst = ms.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
                    report.add_check(
                        &format!("no_growth_k{k}"),
                        CheckKind::Expectation,
                        worst <= c.growth_tol,
                        format!("largest ratio of consecutive means: {worst:.4}"),
                    );
                }
            }
        }
        if let Some(pi) = c.powers.iter().position(|&p| p == 1) {
            let worst = dist_means[pi].iter().copied().fold(0.0, f64::max);
            report.add_check(
                "distortion_bounded",
                CheckKind::Expectation,
                worst <= c.distortion_tol,
                format!("largest mean of the distortion ratio: {worst:.4}"),
            );
            if let Some(f) = log_log_fit(&ns_f, &dist_means[pi]) {
                report.fits.push(Fit::from_linear("distortion_trend", f));
            }
        }
        Ok(report)
    }
}
