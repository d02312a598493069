//! Monte Carlo studies built on the estimators of the other modules.
//!
//! Each study is split into units: a chunk of trials, a matrix size or a test
//! vector. A unit returns a serializable partial result, and `assemble`
//! reduces the partials in unit order. Counts are integers and floating-point
//! sums are accumulated in trial order inside a unit, so the report depends
//! only on the configuration, never on the thread count or on whether the
//! units ran in one process or were resumed from disk.

use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fmt::Debug;
use std::ops::Range;
use thiserror::Error;

use crate::arithmetic::ArithmeticError;
use crate::ensembles::EnsembleError;
use crate::rng::{derive_key, Domain};
use crate::smallball::{ConcentrationEstimate, SmallBallError, WindowCenter};
use crate::spectral::SpectralError;

mod audit;
mod fourier;
mod gaps;
mod hanson_wright;
mod identities;
mod invlwo;
mod lcd_survey;
mod locallaw;
mod moments;
mod negcorr;
pub mod report;
mod smallball_lcd;
mod tail;
mod threshold_survey;
pub mod vectors;

pub use audit::{AuditConfig, FlatnessAudit};
pub use fourier::{CharFnConfig, FourierChecks};
pub use gaps::{GapsConfig, Repulsion};
pub use hanson_wright::{HansonWright, HwConfig, MatrixSpec};
pub use identities::{DistIdConfig, Identities};
pub use invlwo::{CondInvLwo, InvLwoConfig};
pub use lcd_survey::{LcdSurvey, LcdSurveyConfig};
pub use locallaw::{LocalLaw, LocalLawConfig};
pub use moments::{MomentsConfig, SpectralMoments};
pub use negcorr::{NegCorr, NegCorrConfig, PairSpec};
pub use report::*;
pub use smallball_lcd::{SmallBallConfig, SmallBallVsLcd};
pub use tail::{TailConfig, TailCurve};
pub use threshold_survey::{ThresholdConfig, ThresholdSurvey};
pub use vectors::{LabeledVector, VectorSpec};

/// Smallest accepted trial or sample count.
pub const MIN_TRIALS: usize = 100;

/// Trials per unit for the chunked Monte Carlo studies.
pub const TRIAL_CHUNK: usize = 2500;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
    #[error(transparent)]
    SmallBall(#[from] SmallBallError),
    #[error("unit {index} is out of range ({units} units)")]
    UnitOutOfRange { index: usize, units: usize },
    #[error("expected {expected} partial results, got {got}")]
    PartialCount { expected: usize, got: usize },
}

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T, ExperimentError> {
    Err(ExperimentError::Config(msg.into()))
}

/// Values given on the command line that take precedence over a config file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub n: Option<usize>,
}

/// A study configuration: parsed from TOML or JSON, echoed into the report.
pub trait ExperimentConfig: Serialize + DeserializeOwned + Default + Clone + Debug + PartialEq + Send + Sync {
    fn validate(&self) -> Result<(), ExperimentError>;
    fn apply(&mut self, overrides: &Overrides);
}

/// A study split into independently computable units.
pub trait Study: Sized + Sync {
    type Config: ExperimentConfig;
    type Partial: Serialize + DeserializeOwned + Send;

    /// Name used in reports and on the command line.
    const NAME: &'static str;

    /// Validate the configuration and precompute fixed inputs.
    fn new(config: Self::Config) -> Result<Self, ExperimentError>;
    fn config(&self) -> &Self::Config;
    fn units(&self) -> usize;
    fn run_unit(&self, index: usize) -> Result<Self::Partial, ExperimentError>;
    fn assemble(&self, partials: Vec<Self::Partial>) -> Result<ExperimentReport, ExperimentError>;

    fn config_json(&self) -> serde_json::Value {
        serde_json::to_value(self.config()).expect("configs serialize")
    }

    fn check_unit(&self, index: usize) -> Result<(), ExperimentError> {
        let units = self.units();
        if index >= units {
            return Err(ExperimentError::UnitOutOfRange { index, units });
        }
        Ok(())
    }

    fn check_partials(&self, partials: &[Self::Partial]) -> Result<(), ExperimentError> {
        if partials.len() != self.units() {
            return Err(ExperimentError::PartialCount {
                expected: self.units(),
                got: partials.len(),
            });
        }
        Ok(())
    }
}

/// Run every unit in order and assemble the report.
pub fn run_study<S: Study>(study: &S) -> Result<ExperimentReport, ExperimentError> {
    let partials = (0..study.units())
        .map(|i| study.run_unit(i))
        .collect::<Result<Vec<_>, _>>()?;
    study.assemble(partials)
}

/// Build and run a study from its configuration.
pub fn run_config<S: Study>(config: S::Config) -> Result<ExperimentReport, ExperimentError> {
    run_study(&S::new(config)?)
}

pub fn tail_curve(cfg: TailConfig) -> Result<ExperimentReport, ExperimentError> {
    run_config::<TailCurve>(cfg)
}

pub fn repulsion(cfg: GapsConfig) -> Result<ExperimentReport, ExperimentError> {
    run_config::<Repulsion>(cfg)
}

pub fn local_law(cfg: LocalLawConfig) -> Result<ExperimentReport, ExperimentError> {
    run_config::<LocalLaw>(cfg)
}

pub fn spectral_moments(cfg: MomentsConfig) -> Result<ExperimentReport, ExperimentError> {
    run_config::<SpectralMoments>(cfg)
}

pub fn hanson_wright(cfg: HwConfig) -> Result<ExperimentReport, ExperimentError> {
    run_config::<HansonWright>(cfg)
}

pub fn neg_corr(cfg: NegCorrConfig) -> Result<ExperimentReport, ExperimentError> {
    run_config::<NegCorr>(cfg)
}

pub fn cond_invlwo(cfg: InvLwoConfig) -> Result<ExperimentReport, ExperimentError> {
    run_config::<CondInvLwo>(cfg)
}

pub fn smallball_vs_lcd(cfg: SmallBallConfig) -> Result<ExperimentReport, ExperimentError> {
    run_config::<SmallBallVsLcd>(cfg)
}

pub fn flatness_audit(cfg: AuditConfig) -> Result<ExperimentReport, ExperimentError> {
    run_config::<FlatnessAudit>(cfg)
}

pub fn lcd_survey(cfg: LcdSurveyConfig) -> Result<ExperimentReport, ExperimentError> {
    run_config::<LcdSurvey>(cfg)
}

pub fn distance_identities(cfg: DistIdConfig) -> Result<ExperimentReport, ExperimentError> {
    run_config::<Identities>(cfg)
}

pub fn fourier_checks(cfg: CharFnConfig) -> Result<ExperimentReport, ExperimentError> {
    run_config::<FourierChecks>(cfg)
}

pub fn threshold_survey(cfg: ThresholdConfig) -> Result<ExperimentReport, ExperimentError> {
    run_config::<ThresholdSurvey>(cfg)
}

// Shared helpers.

/// Seed of trial `t` for matrix size `n`.
pub(crate) fn sample_seed(seed: u64, n: usize, t: u64) -> u64 {
    derive_key(seed, Domain::Trial, t, n as u64)
}

pub(crate) fn chunk_count(total: usize) -> usize {
    total.div_ceil(TRIAL_CHUNK)
}

pub(crate) fn chunk_range(index: usize, total: usize) -> Range<u64> {
    let lo = index * TRIAL_CHUNK;
    let hi = ((index + 1) * TRIAL_CHUNK).min(total);
    lo as u64..hi as u64
}

pub(crate) fn check_trials(name: &str, trials: usize) -> Result<(), ExperimentError> {
    if trials < MIN_TRIALS {
        return config_err(format!("{name} must be at least {MIN_TRIALS}, got {trials}"));
    }
    Ok(())
}

/// Positive, finite and strictly ascending. Empty grids are allowed.
pub(crate) fn check_grid(name: &str, grid: &[f64]) -> Result<(), ExperimentError> {
    if grid.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return config_err(format!("{name} must contain finite nonnegative values"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return config_err(format!("{name} must be strictly ascending"));
    }
    Ok(())
}

pub(crate) fn check_unit_interval(name: &str, x: f64, open: bool) -> Result<(), ExperimentError> {
    let ok = if open { x > 0.0 && x < 1.0 } else { (0.0..=1.0).contains(&x) };
    if !ok {
        return config_err(format!("{name} = {x} is outside the unit interval"));
    }
    Ok(())
}

pub(crate) fn estimate(hits: u64, trials: u64) -> ConcentrationEstimate {
    ConcentrationEstimate::from_counts(hits, trials, WindowCenter::At(0.0))
}

/// Element-wise sum of count vectors.
pub(crate) fn add_counts(acc: &mut [u64], other: &[u64]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a += b;
    }
}

/// Standard row of an estimate: hits, trials, p̂ and the Wilson interval.
pub(crate) fn estimate_cells(e: &ConcentrationEstimate) -> Vec<Cell> {
    vec![
        Cell::int(e.hits),
        Cell::int(e.trials),
        Cell::num(e.p_hat),
        Cell::num(e.ci_low),
        Cell::num(e.ci_high),
    ]
}
