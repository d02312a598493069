//! Exact checks of the characteristic-function inequalities.

use serde::{Deserialize, Serialize};

use super::vectors::random_unit;
use super::*;
use crate::ensembles::{symmetrized_atoms, Distribution, SymMatrix};
use crate::rng::CounterRng;
use crate::smallball::{cosine_bounds_check, cosine_product_check, decoupling_check, esseen_bound_check, xi_bounds_check};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CharFnConfig {
    /// Discrete laws for the bounds on `φ_ξ`.
    pub laws: Vec<Distribution>,
    /// Laziness `ν` of `ξ_ν`.
    pub nu: f64,
    pub grid_points: usize,
    /// `t` runs over `[0, t_max]`.
    pub t_max: f64,
    pub seed: u64,
    /// Law of `X` in the decoupling and anticoncentration checks.
    pub ensemble: Distribution,
    pub decoupling_dims: Vec<usize>,
    pub decoupling_cases: usize,
    /// Dimension and radii for the quadrature bound on `P(|⟨X, v⟩| ≤ δ)`.
    pub esseen_dim: usize,
    pub esseen_deltas: Vec<f64>,
    pub panels: usize,
    /// Constant `c` and test count for the cosine-product bound.
    pub product_c: f64,
    pub product_cases: usize,
    pub product_dim: usize,
}

impl Default for CharFnConfig {
    fn default() -> Self {
        let uniform = Distribution::uniform_pm1_zero([1.0 / 3.0; 3]).expect("valid weights");
        Self {
            laws: vec![Distribution::rademacher(), uniform],
            nu: 0.25,
            grid_points: 1000,
            t_max: 4.0,
            seed: 0,
            ensemble: Distribution::rademacher(),
            decoupling_dims: vec![4, 6, 8],
            decoupling_cases: 100,
            esseen_dim: 8,
            esseen_deltas: vec![0.05, 0.1, 0.2],
            panels: 20_000,
            product_c: 0.1,
            product_cases: 200,
            product_dim: 6,
        }
    }
}

impl ExperimentConfig for CharFnConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        check_unit_interval("nu", self.nu, true)?;
        if self.grid_points < 2 || !(self.t_max > 0.0) {
            return config_err("grid_points must be at least 2 and t_max positive");
        }
        if self.laws.iter().any(|l| !l.is_discrete()) || !self.ensemble.is_discrete() {
            return config_err("the exact checks need discrete laws");
        }
        if self.decoupling_dims.iter().any(|&d| !(2..=crate::smallball::MAX_DECOUPLING_DIM).contains(&d)) {
            return config_err("decoupling dimensions must lie in 2..=14");
        }
        if self.esseen_dim == 0 || self.esseen_dim > 16 || self.panels < 2 {
            return config_err("esseen_dim must lie in 1..=16 and panels be at least 2");
        }
        check_grid("esseen_deltas", &self.esseen_deltas)?;
        if self.esseen_deltas.first().is_some_and(|&d| d <= 0.0) {
            return config_err("esseen_deltas must be positive");
        }
        check_unit_interval("product_c", self.product_c, true)?;
        if self.product_dim == 0 {
            return config_err("product_dim must be positive");
        }
        Ok(())
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.trials {
            self.decoupling_cases = t;
            self.product_cases = t;
        }
        if let Some(n) = o.n {
            self.decoupling_dims = vec![n];
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FourierPartial {
    Bounds {
        /// Per law: points, lower, upper and domination violations, largest violation.
        laws: Vec<(String, usize, usize, usize, usize, f64)>,
        cosine_points: usize,
        cosine_violations: usize,
        cosine_max: f64,
    },
    Esseen {
        /// `(vector, δ, lhs, rhs, ratio, richardson)`.
        rows: Vec<(String, f64, f64, f64, f64, f64)>,
    },
    Product {
        cases: usize,
        violations: usize,
        max_ratio: f64,
    },
    Decoupling {
        dim: usize,
        cases: usize,
        violations: usize,
        max_excess: f64,
    },
}

pub struct FourierChecks {
    cfg: CharFnConfig,
}

fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect()
}

impl FourierChecks {
    fn bounds_unit(&self) -> Result<FourierPartial, ExperimentError> {
        let c = &self.cfg;
        let grid = uniform_grid(0.0, c.t_max, c.grid_points);
        let mut laws = Vec::new();
        for law in &c.laws {
            let r = xi_bounds_check(law, c.nu, &grid)?;
            laws.push((
                law.short_name(),
                r.points,
                r.lower_violations,
                r.upper_violations,
                r.domination_violations,
                r.max_violation,
            ));
        }
        let cos = cosine_bounds_check(&uniform_grid(-1.0, 1.0, c.grid_points));
        Ok(FourierPartial::Bounds {
            laws,
            cosine_points: cos.points,
            cosine_violations: cos.violations,
            cosine_max: cos.max_violation,
        })
    }

    fn esseen_unit(&self) -> Result<FourierPartial, ExperimentError> {
        let c = &self.cfg;
        let d = c.esseen_dim;
        let vectors = [
            ("constant".to_string(), vec![1.0 / (d as f64).sqrt(); d]),
            ("random".to_string(), random_unit(d, c.seed, 0)),
        ];
        let mut rows = Vec::new();
        for (label, v) in &vectors {
            for &delta in &c.esseen_deltas {
                let e = esseen_bound_check(&c.ensemble, v, delta, c.panels)?;
                rows.push((label.clone(), delta, e.lhs, e.rhs, e.ratio, e.richardson_rel));
            }
        }
        Ok(FourierPartial::Esseen { rows })
    }

    fn product_unit(&self) -> Result<FourierPartial, ExperimentError> {
        let c = &self.cfg;
        let xi = symmetrized_atoms(&Distribution::rademacher())?;
        let mut rng = CounterRng::new(c.seed, Domain::Auxiliary, 43, 0);
        let (mut violations, mut max_ratio) = (0, 0.0f64);
        for _ in 0..c.product_cases {
            let a: Vec<f64> = (0..c.product_dim).map(|_| rng.uniform() * 2.0 - 1.0).collect();
            let r = cosine_product_check(&xi, &a, c.product_c, 400);
            violations += usize::from(!r.holds());
            max_ratio = max_ratio.max(r.lhs / r.rhs);
        }
        Ok(FourierPartial::Product {
            cases: c.product_cases,
            violations,
            max_ratio,
        })
    }

    fn decoupling_unit(&self, dim: usize) -> Result<FourierPartial, ExperimentError> {
        let c = &self.cfg;
        let (mut violations, mut max_excess) = (0, f64::NEG_INFINITY);
        for case in 0..c.decoupling_cases {
            let mut rng = CounterRng::new(c.seed, Domain::Auxiliary, dim as u64, case as u64);
            let m = SymMatrix::from_upper_fn(dim, |_, _| rng.uniform() * 2.0 - 1.0);
            let u: Vec<f64> = (0..dim).map(|_| rng.uniform() - 0.5).collect();
            let theta = rng.uniform();
            // Nonempty proper subset J.
            let j_set = loop {
                let j: Vec<usize> = (0..dim).filter(|_| rng.uniform() < 0.5).collect();
                if !j.is_empty() && j.len() < dim {
                    break j;
                }
            };
            let r = decoupling_check(&c.ensemble, &m, &u, theta, &j_set)?;
            violations += usize::from(!r.holds());
            max_excess = max_excess.max(r.lhs - r.rhs);
        }
        Ok(FourierPartial::Decoupling {
            dim,
            cases: c.decoupling_cases,
            violations,
            max_excess,
        })
    }
}

impl Study for FourierChecks {
    type Config = CharFnConfig;
    type Partial = FourierPartial;
    const NAME: &'static str = "charfn";

    fn new(cfg: CharFnConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    fn config(&self) -> &CharFnConfig {
        &self.cfg
    }

    fn units(&self) -> usize {
        3 + self.cfg.decoupling_dims.len()
    }

    fn run_unit(&self, index: usize) -> Result<FourierPartial, ExperimentError> {
        self.check_unit(index)?;
        match index {
            0 => self.bounds_unit(),
            1 => self.esseen_unit(),
            2 => self.product_unit(),
            i => self.decoupling_unit(self.cfg.decoupling_dims[i - 3]),
        }
    }

    fn assemble(&self, partials: Vec<FourierPartial>) -> Result<ExperimentReport, ExperimentError> {
        self.check_partials(&partials)?;
        let c = &self.cfg;
        let mut report = ExperimentReport::new(Self::NAME, self.config_json());
        let mut dec = Table::new("decoupling", &["n", "cases", "violations", "max_lhs_minus_rhs"]);
        let mut dec_violations = 0;
        for p in partials {
            match p {
                FourierPartial::Bounds {
                    laws,
                    cosine_points,
                    cosine_violations,
                    cosine_max,
                } => {
                    let mut t = Table::new(
                        "xi_bounds",
                        &["law", "nu", "points", "lower_violations", "upper_violations", "domination_violations", "max_violation"],
                    );
                    let mut total = 0;
                    for (name, pts, lo, up, dom, max) in laws {
                        total += lo + up + dom;
                        t.push(vec![
                            Cell::text(name),
                            Cell::num(c.nu),
                            Cell::int(pts),
                            Cell::int(lo),
                            Cell::int(up),
                            Cell::int(dom),
                            Cell::num(max),
                        ]);
                    }
                    report.tables.push(t);
                    let mut cos = Table::new("cosine_bounds", &["points", "violations", "max_violation"]);
                    cos.push(vec![Cell::int(cosine_points), Cell::int(cosine_violations), Cell::num(cosine_max)]);
                    report.tables.push(cos);
                    report.add_check(
                        "xi_bounds",
                        CheckKind::Invariant,
                        total == 0,
                        format!("{total} violations of the two-sided bound on phi_xi and its domination"),
                    );
                    report.add_check(
                        "cosine_bounds",
                        CheckKind::Invariant,
                        cosine_violations == 0,
                        format!("{cosine_violations} violations of 1 - 20|a|^2 <= cos(2 pi a) <= 1 - |a|^2"),
                    );
                }
                FourierPartial::Esseen { rows } => {
                    let mut t = Table::new("anticoncentration", &["vector", "delta", "lhs", "rhs", "ratio", "richardson_rel"]);
                    let mut worst: f64 = 0.0;
                    let mut ratio: f64 = 0.0;
                    for (label, delta, lhs, rhs, r, rich) in rows {
                        worst = worst.max(rich);
                        ratio = ratio.max(r);
                        t.push(vec![
                            Cell::text(label),
                            Cell::num(delta),
                            Cell::num(lhs),
                            Cell::num(rhs),
                            Cell::num(r),
                            Cell::num(rich),
                        ]);
                    }
                    report.tables.push(t);
                    report.add_constant(
                        "anticoncentration_ratio",
                        Some(ratio),
                        "largest lhs / (delta * integral of |phi|); the implicit constant is not pinned",
                    );
                    report.add_check(
                        "quadrature_converged",
                        CheckKind::Expectation,
                        worst <= 1e-6,
                        format!("largest relative Simpson refinement change {worst:.3e}"),
                    );
                }
                FourierPartial::Product {
                    cases,
                    violations,
                    max_ratio,
                } => {
                    let mut t = Table::new("cosine_product", &["c", "cases", "violations", "max_lhs_over_rhs"]);
                    t.push(vec![Cell::num(c.product_c), Cell::int(cases), Cell::int(violations), Cell::num(max_ratio)]);
                    report.tables.push(t);
                    report.add_check(
                        "cosine_product_bound",
                        CheckKind::Expectation,
                        violations == 0,
                        format!("{violations} of {cases} random vectors violate the bound at c = {}", c.product_c),
                    );
                }
                FourierPartial::Decoupling {
                    dim,
                    cases,
                    violations,
                    max_excess,
                } => {
                    dec_violations += violations;
                    dec.push(vec![Cell::int(dim), Cell::int(cases), Cell::int(violations), Cell::num(max_excess)]);
                }
            }
        }
        report.tables.push(dec);
        report.add_check(
            "decoupling",
            CheckKind::Invariant,
            dec_violations == 0,
            format!("{dec_violations} cases with lhs > rhs + 1e-9"),
        );
        Ok(report)
    }
}
