//! Acceptance criteria. Each test prints one `PASS` / `FAIL` line with the
//! measured quantity next to its pinned tolerance.

mod common;

use common::*;
use gwci::information::{common_information_from_correlations, gaussian_mutual_information, mutual_information_from_correlations};
use gwci::rate_region::{conditional_levels, Side};
use gwci::realization::{diagonal_qw, random_diagonal_qw, random_feasible_qw};
use gwci::{
    apply_transformation, assemble_joint_covariance, canonical_decomposition, check_pangloss_and_marginal_bounds,
    conditional_independence_gap, conditional_rdf, gray_wyner_triple, linalg, lower_bound_given_qw, minimize_lower_bound,
    sample, water_filling, wyner_common_information, wyner_lossy_ci, NumericTolerances, QwParameter, SearchMode,
    WeakRealization,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CRIT1_CW_TOL: f64 = 1e-9;
const CRIT1_Q_TOL: f64 = 1e-8;
const CRIT2_TOL: f64 = 1e-8;
const CRIT3_IDENTITY_TOL: f64 = 1e-12;
const CRIT3_SEARCH_TOL: f64 = 1e-8;
const CRIT4_TOL: f64 = 1e-12;
const CRIT6_COV_TOL: f64 = 0.005;
const CRIT6_MI_TOL: f64 = 1e-2;
const CRIT7_PLANE_TOL: f64 = 1e-6;
const CRIT7_SLACK: f64 = 1e-6;
const CRIT8_SUM_TOL: f64 = 1e-10;
const CRIT8_RATE_TOL: f64 = 1e-6;
const CRIT9_BOUNDARY_TOL: f64 = 1e-12;
const CRIT10_TOL: f64 = 1e-8;

fn report(id: &str, name: &str, pass: bool, detail: String) {
    println!("criterion {id:>2} {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}

#[test]
fn criterion_01_scalar_common_information() {
    let c = decomposition(&[0.5]);
    let cw = wyner_common_information(&c).unwrap().value.value();
    let cw_err = (cw - 0.5 * 3f64.ln()).abs();
    let opt = minimize_lower_bound(&c.d, SearchMode::Diagonal, NumericTolerances::default().opt_tol).unwrap();
    let q_err = (opt.qw.diagonal()[0] - 1.0).abs();
    let pass = cw_err <= CRIT1_CW_TOL && q_err <= CRIT1_Q_TOL;
    report("1", "scalar common information", pass, format!("|C_W - ½ln3| = {cw_err:.2e} (tol {CRIT1_CW_TOL:e}), |q* - 1| = {q_err:.2e} (tol {CRIT1_Q_TOL:e})"));
    assert!(pass);
}

#[test]
fn criterion_02_basis_invariance() {
    let tol = NumericTolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_d, mut worst_cw) = (0.0_f64, 0.0_f64);
    let mut mismatched_n = 0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=4);
        let (k1, k2) = (rng.gen_range(0..=2), rng.gen_range(0..=2));
        let mut d = random_correlations(n, &mut rng);
        d.sort_by(|a, b| b.total_cmp(a));
        let pair = canonical_pair(&d, k1, k2);
        let s1 = random_nonsingular(n + k1, &mut rng);
        let s2 = random_nonsingular(n + k2, &mut rng);
        let moved = apply_transformation(&pair, &s1, &s2, &tol).unwrap();
        let a = canonical_decomposition(&pair, &tol).unwrap();
        let b = canonical_decomposition(&moved, &tol).unwrap();
        if a.d.len() != b.d.len() {
            mismatched_n += 1;
            continue;
        }
        for (x, y) in a.d.iter().zip(&b.d) {
            worst_d = worst_d.max((x - y).abs());
        }
        let cwa = wyner_common_information(&a).unwrap().value.value();
        let cwb = wyner_common_information(&b).unwrap().value.value();
        worst_cw = worst_cw.max((cwa - cwb).abs());
    }
    let pass = mismatched_n == 0 && worst_d <= CRIT2_TOL && worst_cw <= CRIT2_TOL;
    report("2", "basis invariance", pass, format!("max |Δd| = {worst_d:.2e}, max |ΔC_W| = {worst_cw:.2e} (tol {CRIT2_TOL:e}), dimension mismatches {mismatched_n}"));
    assert!(pass);
}

#[test]
fn criterion_03_lower_bound_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_identity, mut worst_search) = (0.0_f64, f64::INFINITY);
    for instance in 0..100u64 {
        let n = rng.gen_range(1..=4);
        let d = random_correlations(n, &mut rng);
        let cw = common_information_from_correlations(&d);
        let at_identity = lower_bound_given_qw(&d, &QwParameter::identity(n)).unwrap().value();
        worst_identity = worst_identity.max((at_identity - cw).abs());
        for _ in 0..1000 {
            let qw = random_feasible_qw(&d, 0.0, &mut rng).unwrap();
            let v = lower_bound_given_qw(&d, &qw).unwrap().value();
            worst_search = worst_search.min(v - cw);
        }
        let full = minimize_lower_bound(&d, SearchMode::Full { starts: 3, steps: 30, seed: 1000 + instance }, 1e-10).unwrap();
        worst_search = worst_search.min(full.value.value() - cw);
    }
    let pass = worst_identity <= CRIT3_IDENTITY_TOL && worst_search >= -CRIT3_SEARCH_TOL;
    report("3", "lower-bound consistency", pass, format!("max |LB(I) - C_W| = {worst_identity:.2e} (tol {CRIT3_IDENTITY_TOL:e}), min LB - C_W over search = {worst_search:.2e} (floor -{CRIT3_SEARCH_TOL:e})"));
    assert!(pass);
}

fn criterion_four_realizations() -> Vec<WeakRealization> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut out = Vec::with_capacity(2000);
    for _ in 0..20 {
        let n = rng.gen_range(1..=4);
        let d = random_correlations(n, &mut rng);
        for _ in 0..100 {
            let qw = random_feasible_qw(&d, 1e-3, &mut rng).unwrap();
            out.push(assemble_joint_covariance(&d, &qw).unwrap());
        }
    }
    out
}

#[test]
fn criterion_04_conditional_independence() {
    let worst = criterion_four_realizations()
        .iter()
        .map(|r| conditional_independence_gap(r).unwrap())
        .fold(0.0_f64, f64::max);
    let pass = worst <= CRIT4_TOL;
    report("4", "conditional independence", pass, format!("max gap over 2000 realizations = {worst:.2e} (tol {CRIT4_TOL:e})"));
    assert!(pass);
}

#[test]
fn criterion_05_realization_marginal() {
    let mut realizations = criterion_four_realizations();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let d = random_correlations(rng.gen_range(1..=4), &mut rng);
        realizations.push(assemble_joint_covariance(&d, &random_diagonal_qw(&d, 0.0, &mut rng).unwrap()).unwrap());
        realizations.push(assemble_joint_covariance(&d, &QwParameter::identity(d.len())).unwrap());
    }
    let mut failures = 0;
    for r in &realizations {
        let n = r.n();
        let mut expected = DMatrix::<f64>::identity(2 * n, 2 * n);
        for j in 0..n {
            expected[(j, n + j)] = r.d[j];
            expected[(n + j, j)] = r.d[j];
        }
        if r.qs.view((0, 0), (2 * n, 2 * n)) != expected {
            failures += 1;
        }
    }
    let pass = failures == 0;
    report("5", "realization marginal", pass, format!("{failures} of {} blocks differ from [[I,D],[D,I]] (exact equality)", realizations.len()));
    assert!(pass);
}

#[test]
fn criterion_06_monte_carlo() {
    let mut lines = Vec::new();
    let mut pass = true;
    for d in [vec![0.5], vec![0.9, 0.3]] {
        let n = d.len();
        let real = assemble_joint_covariance(&d, &QwParameter::identity(n)).unwrap();
        let xs = sample(&real, 1_000_000, 42);
        let cov = linalg::sample_covariance(&xs);
        let dev = linalg::max_abs_diff(&cov, &real.qs);
        let mi_hat = gaussian_mutual_information(&cov.view((0, 0), (2 * n, 2 * n)).into_owned(), n);
        let mi = mutual_information_from_correlations(&d);
        let mi_err = (mi_hat - mi).abs();
        pass &= dev <= CRIT6_COV_TOL && mi_err <= CRIT6_MI_TOL;
        lines.push(format!("d={d:?}: cov dev {dev:.2e} (tol {CRIT6_COV_TOL}), |MI_hat - MI| {mi_err:.2e} (tol {CRIT6_MI_TOL})"));
    }
    report("6", "Monte Carlo oracle", pass, lines.join("; "));
    assert!(pass);
}

#[test]
fn criterion_07_pangloss_identity() {
    let mut pass = true;
    let mut lines = Vec::new();
    for d in [vec![0.5], vec![0.9, 0.3]] {
        let c = decomposition(&d);
        let mut worst = 0.0_f64;
        let mut off_plane = 0;
        let mut worst_at = (0.0, 0.0);
        let grid = interior_grid(&d, 20);
        for &delta in &grid {
            let p = gray_wyner_triple(&c, &QwParameter::identity(d.len()), delta, None).unwrap();
            if p.pangloss_gap.abs() > CRIT7_PLANE_TOL {
                off_plane += 1;
            }
            if p.pangloss_gap.abs() > worst {
                worst = p.pangloss_gap.abs();
                worst_at = (delta.delta1, delta.delta2);
            }
        }
        pass &= off_plane == 0;
        lines.push(format!(
            "d={d:?} q=I: {off_plane}/{} grid points off the plane, max |gap| {worst:.3e} at Δ=({:.4}, {:.4}) (tol {CRIT7_PLANE_TOL:e})",
            grid.len(),
            worst_at.0,
            worst_at.1
        ));

        // at the corner of D_W the identity is attained only at q = 1
        let bound: f64 = d.iter().map(|v| 1.0 - v).sum();
        let corner = dp(bound, bound);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut min_slack = f64::INFINITY;
        for _ in 0..20 {
            let qw = random_diagonal_qw(&d, 0.05, &mut rng).unwrap();
            let p = gray_wyner_triple(&c, &qw, corner, None).unwrap();
            min_slack = min_slack.min(p.pangloss_gap);
        }
        pass &= min_slack > CRIT7_SLACK;
        lines.push(format!("d={d:?} 20 random diagonal q≠I at the corner: min slack {min_slack:.3e} (must exceed {CRIT7_SLACK:e})"));
    }
    report("7", "Pangloss identity", pass, lines.join("; "));
    assert!(pass);
}

#[test]
fn criterion_08_water_filling() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst_sum, mut worst_rate) = (0.0_f64, 0.0_f64);
    let mut over_level = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=3);
        let d = random_correlations(n, &mut rng);
        let qw = random_diagonal_qw(&d, 0.0, &mut rng).unwrap();
        let q = qw.diagonal();
        let levels = conditional_levels(&d, &q, Side::X1).unwrap();
        let total: f64 = levels.iter().sum();
        let delta = rng.gen_range(0.01..1.2) * total;
        let wf = water_filling(&levels, delta, 1e-12).unwrap();
        worst_sum = worst_sum.max((wf.total() - delta.min(total)).abs());
        over_level += wf.allocation.iter().zip(&levels).filter(|(a, l)| a > l || **a < 0.0).count();
        let rate = conditional_rdf(&d, &q, delta).unwrap();
        worst_rate = worst_rate.max((rate - dense_grid_min(&levels, delta)).abs());
    }
    let pass = worst_sum <= CRIT8_SUM_TOL && over_level == 0 && worst_rate <= CRIT8_RATE_TOL;
    report("8", "water-filling", pass, format!("max |Σδ - min(Δ, Σℓ)| = {worst_sum:.2e} (tol {CRIT8_SUM_TOL:e}), allocations above level {over_level}, max |R - grid| = {worst_rate:.2e} (tol {CRIT8_RATE_TOL:e})"));
    assert!(pass);
}

#[test]
fn criterion_09_region_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut wrong = 0;
    let mut checked = 0;
    for _ in 0..100 {
        let d = random_correlations(rng.gen_range(1..=4), &mut rng);
        let c = decomposition(&d);
        let cw = common_information_from_correlations(&c.d);
        let bound: f64 = c.d.iter().map(|v| 1.0 - v).sum();
        let probes = [
            bound,
            bound + 0.5 * CRIT9_BOUNDARY_TOL,
            bound + 100.0 * CRIT9_BOUNDARY_TOL,
            rng.gen_range(0.01..2.0) * bound,
            rng.gen_range(0.01..2.0) * bound,
        ];
        for &a in &probes {
            for &b in &probes {
                let r = wyner_lossy_ci(&c, dp(a, b)).unwrap();
                let expect = a <= bound + CRIT9_BOUNDARY_TOL && b <= bound + CRIT9_BOUNDARY_TOL;
                let rate_ok = match r.rate {
                    Some(v) => expect && v.value() == cw,
                    None => !expect,
                };
                if r.in_d_w != expect || !rate_ok {
                    wrong += 1;
                }
                checked += 1;
            }
        }
    }
    let pass = wrong == 0;
    report("9", "region membership", pass, format!("{wrong} of {checked} probes misclassified (boundary tol {CRIT9_BOUNDARY_TOL:e})"));
    assert!(pass);
}

#[test]
fn criterion_10_marginal_bounds() {
    let mut worst = f64::INFINITY;
    let mut points = 0;
    for d in [vec![0.5], vec![0.9, 0.3]] {
        let c = decomposition(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut qws = vec![QwParameter::identity(d.len())];
        for _ in 0..20 {
            qws.push(random_diagonal_qw(&d, 0.05, &mut rng).unwrap());
        }
        let grid = interior_grid(&d, 20);
        for qw in &qws {
            for &delta in &grid {
                let p = gray_wyner_triple(&c, qw, delta, None).unwrap();
                let b = check_pangloss_and_marginal_bounds(&p, &c, delta).unwrap();
                worst = worst.min(b.marginal1_slack).min(b.marginal2_slack);
                points += 1;
            }
        }
    }
    let pass = worst >= -CRIT10_TOL;
    report("10", "marginal bounds", pass, format!("min marginal slack over {points} points = {worst:.3e} (floor -{CRIT10_TOL:e})"));
    assert!(pass);
}

#[test]
fn criterion_03_identity_is_the_diagonal_minimizer() {
    // companion to criterion 3: the diagonal search lands on q = 1 for every coordinate
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let d = random_correlations(rng.gen_range(1..=4), &mut rng);
        let m = minimize_lower_bound(&d, SearchMode::Diagonal, 1e-10).unwrap();
        assert!(m.qw.diagonal().iter().all(|q| (q - 1.0).abs() < 1e-8));
        let _ = diagonal_qw(&d, &m.qw.diagonal()).unwrap();
    }
}
