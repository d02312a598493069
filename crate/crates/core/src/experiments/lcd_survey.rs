//! LCD, subvector LCD and compressibility of a vector family.

use serde::{Deserialize, Serialize};

use super::vectors::expand_all;
use super::*;
use crate::arithmetic::{
    compress_dist, flat_count, lcd, subvector_lcd, witness_holds, ArithmeticError, LcdParams, LcdResult, SubvectorLcd,
    SubvectorMode,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LcdSurveyConfig {
    pub n: usize,
    pub family: Vec<VectorSpec>,
    pub alpha: f64,
    pub gamma: f64,
    pub cap: f64,
    /// Subvectors drop up to `⌊2μn⌋` coordinates.
    pub mu: f64,
    /// Rescale subvectors to unit length before taking their LCD.
    pub normalize_subvectors: bool,
    pub seed: u64,
    pub delta: f64,
    pub flat_c: f64,
    /// Tolerance for the closed-form comparisons.
    pub tol: f64,
}

impl Default for LcdSurveyConfig {
    fn default() -> Self {
        Self {
            n: 4,
            family: vec![
                VectorSpec::Basis { index: 0 },
                VectorSpec::Constant,
                VectorSpec::TwoLevel { split: 0.5, ratio: 2.0 },
                VectorSpec::RandomUnit { count: 4, seed: 1 },
            ],
            alpha: 0.25,
            gamma: 0.5,
            cap: 1e4,
            mu: 0.1,
            normalize_subvectors: true,
            seed: 0,
            delta: 0.25,
            flat_c: 0.2,
            tol: 1e-6,
        }
    }
}

impl LcdSurveyConfig {
    pub fn params(&self) -> LcdParams {
        LcdParams::new(self.alpha, self.gamma).with_cap(self.cap)
    }
}

impl ExperimentConfig for LcdSurveyConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        self.params().validate()?;
        check_unit_interval("mu", self.mu, false)?;
        if self.mu >= 0.5 {
            return config_err("mu must be below 1/2");
        }
        check_unit_interval("delta", self.delta, true)?;
        check_unit_interval("flat_c", self.flat_c, true)?;
        expand_all(&self.family, self.n).map(|_| ())
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(n) = o.n {
            self.n = n;
        }
    }
}

/// Closed-form LCD for the basis and constant vectors.
///
/// For `e₁`, `‖φe₁‖_T = dist(φ, Z)` first drops below `γφ` at `1/(1+γ)`; for the
/// constant unit vector the same argument runs at scale `√n` with the `√(αn)`
/// branch reading `1 − √α`.
pub fn closed_form_lcd(label: &str, n: usize, alpha: f64, gamma: f64) -> Option<f64> {
    let nf = n as f64;
    if label == "constant" {
        Some(nf.sqrt() * (1.0 / (1.0 + gamma)).max(1.0 - alpha.sqrt()))
    } else if label.starts_with('e') && label[1..].parse::<usize>().is_ok() {
        Some((1.0 / (1.0 + gamma)).max(1.0 - (alpha * nf).sqrt()))
    } else {
        None
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LcdSurveyPartial {
    pub label: String,
    pub structured: bool,
    pub result: LcdResult,
    pub witness_ok: bool,
    pub subvector: SubvectorLcd,
    pub subvector_exact: bool,
    pub compress_dist: f64,
    pub flat_count: usize,
}

pub struct LcdSurvey {
    cfg: LcdSurveyConfig,
    vectors: Vec<LabeledVector>,
}

impl Study for LcdSurvey {
    type Config = LcdSurveyConfig;
    type Partial = LcdSurveyPartial;
    const NAME: &'static str = "lcd";

    fn new(cfg: LcdSurveyConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        let vectors = expand_all(&cfg.family, cfg.n)?;
        Ok(Self { cfg, vectors })
    }

    fn config(&self) -> &LcdSurveyConfig {
        &self.cfg
    }

    fn units(&self) -> usize {
        self.vectors.len()
    }

    fn run_unit(&self, index: usize) -> Result<LcdSurveyPartial, ExperimentError> {
        self.check_unit(index)?;
        let c = &self.cfg;
        let lv = &self.vectors[index];
        let params = c.params();
        let result = lcd(&lv.values, &params)?;
        let witness_ok = witness_holds(&lv.values, &params, c.n, &result);
        let exact = subvector_lcd(&lv.values, &params, c.mu, SubvectorMode::Exact, c.normalize_subvectors);
        let (subvector, subvector_exact) = match exact {
            Ok(s) => (s, true),
            Err(ArithmeticError::SearchTooLarge { .. }) => {
                let mode = SubvectorMode::Heuristic {
                    restarts: 32,
                    seed: crate::rng::derive_key(c.seed, crate::rng::Domain::Unit, index as u64, 0),
                };
                (subvector_lcd(&lv.values, &params, c.mu, mode, c.normalize_subvectors)?, false)
            }
            Err(e) => return Err(e.into()),
        };
        Ok(LcdSurveyPartial {
            label: lv.label.clone(),
            structured: lv.structured,
            result,
            witness_ok,
            subvector,
            subvector_exact,
            compress_dist: compress_dist(&lv.values, c.delta),
            flat_count: flat_count(&lv.values, c.flat_c),
        })
    }

    fn assemble(&self, partials: Vec<LcdSurveyPartial>) -> Result<ExperimentReport, ExperimentError> {
        self.check_partials(&partials)?;
        let c = &self.cfg;
        let mut report = ExperimentReport::new(Self::NAME, self.config_json());
        let mut table = Table::new(
            "lcd",
            &[
                "vector", "structured", "lcd", "finite", "witness_t", "binding", "witness_ok", "closed_form", "abs_err",
                "subvector_lcd", "subvector_exact", "compress_dist", "flat_count",
            ],
        );
        let (mut witness_fail, mut closed_fail, mut closed_checked) = (0, 0, 0);
        for p in &partials {
            let value = p.result.value.bound();
            let closed = closed_form_lcd(&p.label, c.n, c.alpha, c.gamma).filter(|&v| v <= c.cap);
            let err = closed.map(|v| (v - value).abs());
            if let Some(e) = err {
                closed_checked += 1;
                if !(e <= c.tol) || !p.result.value.is_finite() {
                    closed_fail += 1;
                }
            }
            if !p.witness_ok {
                witness_fail += 1;
            }
            table.push(vec![
                Cell::text(&p.label),
                Cell::text(p.structured.to_string()),
                Cell::num(value),
                Cell::text(p.result.value.is_finite().to_string()),
                Cell::num(p.result.witness_t),
                Cell::text(format!("{:?}", p.result.binding_constraint).to_lowercase()),
                Cell::text(p.witness_ok.to_string()),
                Cell::opt(closed),
                Cell::opt(err),
                Cell::num(p.subvector.value.bound()),
                Cell::text(p.subvector_exact.to_string()),
                Cell::num(p.compress_dist),
                Cell::int(p.flat_count),
            ]);
        }
        report.tables.push(table);
        report.add_check(
            "witness_reverifies",
            CheckKind::Invariant,
            witness_fail == 0,
            format!("{witness_fail} of {} witnesses fail the defining inequality", partials.len()),
        );
        report.add_check(
            "closed_forms",
            CheckKind::Invariant,
            closed_fail == 0,
            format!("{closed_fail} of {closed_checked} closed-form cases off by more than {:e}", c.tol),
        );
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_match_known_values() {
        assert!((closed_form_lcd("constant", 4, 0.25, 0.5).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((closed_form_lcd("e0", 4, 0.25, 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(closed_form_lcd("random_0", 4, 0.25, 0.5).is_none());
    }
}
