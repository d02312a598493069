//! Property tests for the invariants of each module.

use proptest::prelude::*;
use rmtlab::arithmetic::{
    compress_dist, is_compressible, lcd, torus_dist, witness_holds, CompressParams, LcdParams,
};
use rmtlab::ensembles::{
    atom_moments, sample_sym, sample_sym_on, sample_zeroed, Atom, Distribution, SymMatrix, ZeroedMatrixParams,
};
use rmtlab::experiments::{self, GapsConfig, TailConfig};
use rmtlab::smallball::{
    charfn_exact, cosine_product_check, decoupling_check, levy_scalar, xi_bounds_check,
};
use rmtlab::spectral::{count_interval, eigenvalues_sym, interlacing_violation, norm_star, singular_profile};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn unit_vector(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 2..=max_len)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / s).collect()
        })
}

/// A symmetric three-point law on {-a, 0, a} rescaled to unit variance, or a random
/// asymmetric two-point law with mean zero.
fn discrete_law() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        (0.05f64..0.95).prop_map(|w| Distribution::uniform_pm1_zero([(1.0 - w) / 2.0, w, (1.0 - w) / 2.0]).unwrap()),
        (0.05f64..1.0).prop_map(|nu| Distribution::lazy_signed(nu).unwrap()),
        (0.05f64..0.95).prop_map(|p| {
            // Values a < 0 < b with p a + (1-p) b = 0 and unit variance.
            let a = -((1.0 - p) / p).sqrt();
            let b = (p / (1.0 - p)).sqrt();
            Distribution::custom_discrete(vec![Atom::new(a, p), Atom::new(b, 1.0 - p)]).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn discrete_laws_are_normalized(d in discrete_law()) {
        let (mass, mean, second) = atom_moments(d.atoms().unwrap());
        prop_assert!((mass - 1.0).abs() <= 1e-12);
        prop_assert!(mean.abs() <= 1e-12);
        prop_assert!((second - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn minors_follow_the_addressing(n in 3usize..12, seed in any::<u64>()) {
        let d = Distribution::rademacher();
        let full = sample_sym(&d, n, seed).unwrap();
        let idx: Vec<usize> = (1..n).collect();
        prop_assert_eq!(full.principal_minor(&idx), sample_sym_on(&d, &idx, seed).unwrap());
    }

    #[test]
    fn zeroed_matrix_has_zero_blocks(n in 3usize..16, seed in any::<u64>()) {
        let d = (n / 3).max(1);
        let p = ZeroedMatrixParams::new(n, d, 0.5, Distribution::rademacher()).unwrap();
        let m = sample_zeroed(&p, seed).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(m.get(i, j), m.get(j, i));
                if (i < d) == (j < d) {
                    prop_assert_eq!(m.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn singular_values_are_sorted_moduli(n in 2usize..20, seed in any::<u64>()) {
        let a = sample_sym(&Distribution::gaussian(), n, seed).unwrap();
        let profile = singular_profile(&a).unwrap();
        let svd = a.to_dense().svd(false, false);
        let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
        s.sort_by(|x, y| y.total_cmp(x));
        for k in 1..=n {
            let want = s[k - 1];
            prop_assert!((profile.sigma(k) - want).abs() <= 1e-8 * want.max(1.0));
        }
    }

    #[test]
    fn eigenvalues_interlace(n in 2usize..16, seed in any::<u64>(), j in 0usize..16) {
        let a = sample_sym(&Distribution::rademacher(), n, seed).unwrap();
        prop_assert!(interlacing_violation(&a, j % n).unwrap() <= 1e-8);
    }

    #[test]
    fn norm_star_is_monotone(s in prop::collection::vec(0.0f64..10.0, 1..20), k in 0usize..20, bump in 0.0f64..5.0) {
        let before = norm_star(&s).unwrap();
        let mut t = s.clone();
        let k = k % t.len();
        t[k] += bump;
        prop_assert!(norm_star(&t).unwrap() >= before - 1e-12);
    }

    #[test]
    fn interval_counts_add(n in 2usize..20, seed in any::<u64>(), a in -5.0f64..0.0, w1 in 0.1f64..5.0, w2 in 0.1f64..5.0) {
        let eigs = eigenvalues_sym(&sample_sym(&Distribution::rademacher(), n, seed).unwrap()).unwrap();
        let m = a + w1;
        prop_assume!(eigs.iter().all(|&x| x != m));
        let whole = count_interval(&eigs, a, m + w2).unwrap();
        prop_assert_eq!(whole, count_interval(&eigs, a, m).unwrap() + count_interval(&eigs, m, m + w2).unwrap());
    }

    #[test]
    fn torus_distance_bounds_and_periodicity(
        v in prop::collection::vec(-20.0f64..20.0, 1..10),
        z in prop::collection::vec(-5i32..5, 10),
    ) {
        let d = torus_dist(&v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(d <= norm + 1e-12);
        prop_assert!(d <= (v.len() as f64).sqrt() / 2.0 + 1e-12);
        let shifted: Vec<f64> = v.iter().zip(&z).map(|(x, k)| x + *k as f64).collect();
        prop_assert!((torus_dist(&shifted) - d).abs() <= 1e-9);
    }

    #[test]
    fn lcd_symmetries(v in unit_vector(6), seed in any::<u64>()) {
        let p = LcdParams::new(0.25, 0.5).with_cap(100.0);
        let base = lcd(&v, &p).unwrap().value.bound();
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        prop_assert!((lcd(&neg, &p).unwrap().value.bound() - base).abs() <= 1e-9 * base.max(1.0));
        let mut perm = v.clone();
        perm.rotate_left((seed % v.len() as u64) as usize);
        let flipped: Vec<f64> = perm
            .iter()
            .enumerate()
            .map(|(i, x)| if (seed >> (i % 64)) & 1 == 1 { -x } else { *x })
            .collect();
        prop_assert!((lcd(&flipped, &p).unwrap().value.bound() - base).abs() <= 1e-9 * base.max(1.0));
    }

    #[test]
    fn lcd_witness_reverifies(v in unit_vector(8), alpha in 0.05f64..0.5, gamma in 0.05f64..0.9) {
        let p = LcdParams::new(alpha, gamma).with_cap(200.0);
        let r = lcd(&v, &p).unwrap();
        prop_assert!(witness_holds(&v, &p, v.len(), &r));
        if r.value.is_finite() {
            // Recheck with an independent evaluation.
            let t = r.witness_t;
            let scaled: Vec<f64> = v.iter().map(|x| t * x).collect();
            let rhs = (gamma * t).min((alpha * v.len() as f64).sqrt());
            prop_assert!(torus_dist(&scaled) <= rhs + 1e-9);
        }
    }

    #[test]
    fn compressibility_classifier_matches_distance(v in unit_vector(30), delta in 0.01f64..0.99, rho in 0.01f64..0.99) {
        let params = CompressParams { delta, rho };
        prop_assert_eq!(is_compressible(&v, &params), compress_dist(&v, delta) <= rho);
    }

    #[test]
    fn characteristic_functions_are_bounded(d in discrete_law(), t in -50.0f64..50.0) {
        prop_assert!(charfn_exact(&d).unwrap().abs(t) <= 1.0 + 1e-12);
    }

    #[test]
    fn levy_is_monotone_and_matches_brute_force(
        mut xs in prop::collection::vec(-3.0f64..3.0, 1000..1200),
        e1 in 0.0f64..0.5,
        de in 0.0f64..0.5,
    ) {
        xs.sort_by(f64::total_cmp);
        let a = levy_scalar(&xs, e1).unwrap();
        let b = levy_scalar(&xs, e1 + de).unwrap();
        prop_assert!(a.hits <= b.hits);
        let mut best = 0;
        for &lo in &xs {
            let c = xs.iter().filter(|&&x| x >= lo && x - lo <= 2.0 * e1).count();
            best = best.max(c);
        }
        prop_assert_eq!(a.hits, best as u64);
    }

    #[test]
    fn xi_bounds_hold_for_discrete_laws(d in discrete_law()) {
        let grid: Vec<f64> = (0..200).map(|k| 4.0 * k as f64 / 199.0).collect();
        let r = xi_bounds_check(&d, 0.25, &grid).unwrap();
        prop_assert_eq!(r.lower_violations + r.upper_violations + r.domination_violations, 0);
    }

    #[test]
    fn cosine_product_bound_holds(a in prop::collection::vec(-1.0f64..1.0, 1..8)) {
        let xi = rmtlab::ensembles::symmetrized_atoms(&Distribution::rademacher()).unwrap();
        prop_assert!(cosine_product_check(&xi, &a, 0.1, 400).holds());
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn decoupling_holds_exhaustively(
        n in 2usize..=6,
        entries in prop::collection::vec(-1.0f64..1.0, 36),
        u in prop::collection::vec(-0.5f64..0.5, 6),
        theta in 0.0f64..1.0,
        mask in 1u32..63,
    ) {
        let m = SymMatrix::from_upper_fn(n, |i, j| entries[i * 6 + j]);
        let j_set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        prop_assume!(!j_set.is_empty() && j_set.len() < n);
        let r = decoupling_check(&Distribution::rademacher(), &m, &u[..n], theta, &j_set).unwrap();
        prop_assert!(r.holds(), "lhs {} rhs {}", r.lhs, r.rhs);
    }
}

proptest! {
    #![proptest_config(config(6))]

    #[test]
    fn tail_estimates_are_monotone_in_eps(seed in any::<u64>()) {
        let cfg = TailConfig { n: 20, trials: 500, seed, ..TailConfig::default() };
        let report = experiments::tail_curve(cfg).unwrap();
        let t = report.table("tail").unwrap();
        let p = t.column("p_hat");
        let hi = t.column("ci_high");
        let lo = t.column("ci_low");
        for k in 1..p.len() {
            // Nondecreasing up to the interval slack.
            prop_assert!(p[k] + (hi[k] - lo[k]) * 1.5 >= p[k - 1]);
        }
    }

    #[test]
    fn repulsion_is_monotone_in_ell(seed in any::<u64>()) {
        let cfg = GapsConfig { n: 12, trials: 500, ells: vec![1, 2, 3], seed, ..GapsConfig::default() };
        let report = experiments::repulsion(cfg).unwrap();
        prop_assert!(report.check("monotone_in_ell").unwrap().passed);
    }
}
