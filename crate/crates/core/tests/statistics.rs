//! Confidence intervals shrink like `1/√trials` in every Monte Carlo study.

use rmtlab::experiments::*;

/// Widths of the intervals in `table` for rows with at least 30 hits and 30 misses.
fn widths(report: &ExperimentReport, table: &str) -> Vec<Option<f64>> {
    let t = report.table(table).unwrap();
    let lo = t.column("ci_low");
    let hi = t.column("ci_high");
    let (hits, trials) = (t.column_index("hits"), t.column_index("trials"));
    (0..lo.len())
        .map(|r| {
            if let (Some(h), Some(n)) = (hits, trials) {
                let h = t.rows[r][h].as_f64().unwrap();
                let n = t.rows[r][n].as_f64().unwrap();
                if h < 30.0 || n - h < 30.0 {
                    return None;
                }
            }
            Some(hi[r] - lo[r])
        })
        .collect()
}

/// Median ratio of interval widths at `trials` and `4 · trials`.
fn shrink_ratio<S: Study>(mut cfg: S::Config, table: &str, trials: usize) -> f64 {
    cfg.apply(&Overrides {
        trials: Some(trials),
        ..Overrides::default()
    });
    let small = run_config::<S>(cfg.clone()).unwrap();
    cfg.apply(&Overrides {
        trials: Some(4 * trials),
        ..Overrides::default()
    });
    let big = run_config::<S>(cfg).unwrap();
    let mut ratios: Vec<f64> = widths(&small, table)
        .into_iter()
        .zip(widths(&big, table))
        .filter_map(|(a, b)| Some(a? / b?))
        .collect();
    assert!(ratios.len() >= 2, "{}: only {} usable rows", S::NAME, ratios.len());
    ratios.sort_by(f64::total_cmp);
    ratios[ratios.len() / 2]
}

fn assert_halves(name: &str, ratio: f64) {
    assert!((1.6..=2.4).contains(&ratio), "{name}: width ratio {ratio}");
}

#[test]
fn tail_intervals_halve() {
    let cfg = TailConfig {
        n: 20,
        eps_grid: vec![0.05, 0.1, 0.2, 0.4, 0.8],
        ..TailConfig::default()
    };
    assert_halves("tail", shrink_ratio::<TailCurve>(cfg, "tail", 2500));
}

#[test]
fn gap_intervals_halve() {
    let cfg = GapsConfig {
        n: 12,
        ..GapsConfig::default()
    };
    assert_halves("gaps", shrink_ratio::<Repulsion>(cfg, "gaps", 2500));
}

#[test]
fn local_law_intervals_halve() {
    let cfg = LocalLawConfig {
        n: 60,
        ..LocalLawConfig::default()
    };
    assert_halves("locallaw", shrink_ratio::<LocalLaw>(cfg, "local_law", 100));
}

#[test]
fn moment_intervals_halve() {
    let cfg = MomentsConfig {
        n_list: vec![20, 30],
        ..MomentsConfig::default()
    };
    assert_halves("moments", shrink_ratio::<SpectralMoments>(cfg, "moments", 200));
}

#[test]
fn hanson_wright_intervals_halve() {
    assert_halves("hw", shrink_ratio::<HansonWright>(HwConfig::default(), "tail", 2500));
}

#[test]
fn conditioned_intervals_halve() {
    let cfg = InvLwoConfig {
        d: 32,
        k_list: vec![0, 2, 4],
        ..InvLwoConfig::default()
    };
    assert_halves("invlwo", shrink_ratio::<CondInvLwo>(cfg, "joint", 2500));
}

#[test]
fn small_ball_intervals_halve() {
    let cfg = SmallBallConfig {
        n: 16,
        eps_grid: vec![0.05, 0.1, 0.2],
        ..SmallBallConfig::default()
    };
    assert_halves("smallball", shrink_ratio::<SmallBallVsLcd>(cfg, "smallball", 2000));
}

#[test]
fn threshold_intervals_halve() {
    assert_halves("threshold", shrink_ratio::<ThresholdSurvey>(ThresholdConfig::default(), "norm_cdf", 1000));
}

#[test]
fn audit_intervals_halve() {
    let cfg = AuditConfig {
        n: 20,
        deltas: vec![0.3],
        rhos: vec![0.45, 0.5, 0.55, 0.6, 0.65],
        ..AuditConfig::default()
    };
    assert_halves("audit", shrink_ratio::<FlatnessAudit>(cfg, "incompressible", 150));
}

#[test]
fn correlation_ratio_intervals_halve() {
    // The ratio interval combines three Wilson intervals; its width still scales like 1/√trials.
    let cfg = NegCorrConfig {
        n: 16,
        eps_grid: vec![0.2, 0.4],
        t_grid: vec![0.0, 0.5],
        ..NegCorrConfig::default()
    };
    let run = |t: usize| {
        let mut c = cfg.clone();
        c.trials = t;
        let r = neg_corr(c).unwrap();
        let table = r.table("neg_corr").unwrap().clone();
        let lo = table.column("ratio_low");
        let hi = table.column("ratio_high");
        lo.iter().zip(&hi).map(|(a, b)| b - a).collect::<Vec<_>>()
    };
    let (a, b) = (run(5000), run(20000));
    let mut ratios: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x / y).collect();
    ratios.sort_by(f64::total_cmp);
    assert_halves("negcorr", ratios[ratios.len() / 2]);
}
