mod common;

use common::*;
use gwci::information::{common_information_from_correlations, mutual_information_from_correlations};
use gwci::rate_region::{bivariate_joint_rdf, conditional_rdf_side, Side};
use gwci::realization::{diagonal_qw, random_feasible_qw};
use gwci::{
    canonical_decomposition, gray_wyner_triple, lower_bound_given_qw, minimize_lower_bound, validate_joint_covariance,
    verify_canonical_form, water_filling, NumericTolerances, SearchMode,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `(p1, p2, Q)` with `Q = A Aᵀ + 0.1 I` for a random square `A`.
fn covariance() -> impl Strategy<Value = (usize, usize, DMatrix<f64>)> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(p1, p2)| {
        let p = p1 + p2;
        prop::collection::vec(-1.0f64..1.0, p * p).prop_map(move |entries| {
            let a = DMatrix::from_vec(p, p, entries);
            (p1, p2, &a * a.transpose() + DMatrix::identity(p, p) * 0.1)
        })
    })
}

fn correlations() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.02f64..0.98, 1..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn validation_is_idempotent((p1, p2, q) in covariance()) {
        let tol = NumericTolerances::default();
        let once = validate_joint_covariance(&q, p1, p2, &tol).unwrap();
        let twice = validate_joint_covariance(once.covariance(), p1, p2, &tol).unwrap();
        prop_assert_eq!(once.covariance(), twice.covariance());
    }

    #[test]
    fn adding_identity_keeps_psd((p1, p2, q) in covariance(), eps in 0.0f64..10.0) {
        let tol = NumericTolerances::default();
        let p = p1 + p2;
        prop_assert!(validate_joint_covariance(&(&q + DMatrix::identity(p, p) * eps), p1, p2, &tol).is_ok());
        let top = q.iter().fold(0.0f64, |a, v| a.max(v.abs())) * p as f64;
        prop_assert!(validate_joint_covariance(&(&q - DMatrix::identity(p, p) * (top + 1.0)), p1, p2, &tol).is_err());
    }

    #[test]
    fn canonical_form_is_reached((p1, p2, q) in covariance()) {
        let tol = NumericTolerances::default();
        let pair = validate_joint_covariance(&q, p1, p2, &tol).unwrap();
        let c = canonical_decomposition(&pair, &tol).unwrap();
        prop_assert!(c.d.iter().all(|&v| v > 0.0 && v < 1.0));
        prop_assert!(c.d.windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(c.p11 + c.p12 + c.p13, p1);
        prop_assert_eq!(c.p21 + c.p22 + c.p23, p2);
        let report = verify_canonical_form(&c, &pair);
        prop_assert!(report.passed, "deviation {}", report.max_deviation);
    }

    #[test]
    fn common_information_dominates_mutual_information(d in correlations()) {
        prop_assert!(common_information_from_correlations(&d) >= mutual_information_from_correlations(&d));
    }

    #[test]
    fn common_information_increases_with_each_correlation(d in correlations(), j in 0usize..4, h in 1e-4f64..1e-2) {
        let j = j % d.len();
        let mut up = d.clone();
        up[j] = (up[j] + h).min(0.99);
        prop_assert!(common_information_from_correlations(&up) >= common_information_from_correlations(&d));
    }

    #[test]
    fn diagonal_search_lands_on_identity(d in correlations()) {
        let m = minimize_lower_bound(&d, SearchMode::Diagonal, 1e-10).unwrap();
        for q in m.qw.diagonal() {
            prop_assert!((q - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn lower_bound_never_below_common_information(d in correlations(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cw = common_information_from_correlations(&d);
        for _ in 0..20 {
            let qw = random_feasible_qw(&d, 0.0, &mut rng).unwrap();
            prop_assert!(lower_bound_given_qw(&d, &qw).unwrap().value() >= cw - 1e-10);
        }
    }

    #[test]
    fn water_filling_is_feasible(levels in prop::collection::vec(0.0f64..3.0, 1..=6), frac in 0.0f64..1.5) {
        let total: f64 = levels.iter().sum();
        let delta = frac * total;
        let wf = water_filling(&levels, delta, 1e-12).unwrap();
        prop_assert!((wf.total() - delta.min(total)).abs() <= 1e-10);
        for (a, l) in wf.allocation.iter().zip(&levels) {
            prop_assert!(*a >= 0.0 && a <= l);
        }
    }

    #[test]
    fn conditional_rdf_monotonicity(d in correlations(), t in -0.95f64..0.95, dt in 0.0f64..0.04, delta in 0.01f64..2.0, ddelta in 0.0f64..0.5) {
        // q_j = d_j^(-t) walks from d_j (t = -1) through 1 to 1/d_j (t = 1)
        let q_at = |t: f64| -> Vec<f64> { d.iter().map(|&v| v.powf(-t)).collect() };
        let (q, q_up) = (q_at(t), q_at(t + dt));
        for side in [Side::X1, Side::X2] {
            let r = conditional_rdf_side(&d, &q, delta, side).unwrap();
            prop_assert!(conditional_rdf_side(&d, &q, delta + ddelta, side).unwrap() <= r + 1e-12);
        }
        // each q_j grows from q to q_up
        let r1 = conditional_rdf_side(&d, &q, delta, Side::X1).unwrap();
        let r2 = conditional_rdf_side(&d, &q, delta, Side::X2).unwrap();
        prop_assert!(conditional_rdf_side(&d, &q_up, delta, Side::X1).unwrap() >= r1 - 1e-12);
        prop_assert!(conditional_rdf_side(&d, &q_up, delta, Side::X2).unwrap() <= r2 + 1e-12);
    }

    #[test]
    fn bivariate_rdf_sits_between_bounds(rho in 0.0f64..0.99, a in 0.01f64..1.0, b in 0.01f64..1.0) {
        let r = bivariate_joint_rdf(rho, a, b);
        let shannon = 0.5 * ((1.0 - rho * rho) / (a * b)).ln();
        let separate = 0.5 * (1.0 / a).ln() + 0.5 * (1.0 / b).ln();
        prop_assert!(r >= shannon - 1e-12);
        prop_assert!(r <= separate + 1e-12);
        prop_assert!(r >= 0.5 * (1.0 / a.min(b)).ln() - 1e-12);
    }

    #[test]
    fn triples_respect_the_pangloss_bound(d in prop::collection::vec(0.05f64..0.95, 1..=2), t in prop::collection::vec(-0.9f64..0.9, 2), f1 in 0.05f64..1.5, f2 in 0.05f64..1.5) {
        let c = decomposition(&d);
        let q: Vec<f64> = c.d.iter().zip(t.iter().cycle()).map(|(&v, &t)| v.powf(-t)).collect();
        let qw = diagonal_qw(&c.d, &q).unwrap();
        let bound: f64 = c.d.iter().map(|v| 1.0 - v).sum();
        let p = gray_wyner_triple(&c, &qw, dp(f1 * bound, f2 * bound), None).unwrap();
        prop_assert!(p.pangloss_gap >= -1e-8, "gap {}", p.pangloss_gap);
    }
}
