//! `gwci verify`: the acceptance checks run against the input covariance.

use gwci::information::{common_information_from_correlations, gaussian_mutual_information, mutual_information_from_correlations};
use gwci::rate_region::{conditional_levels, conditional_rdf, gray_wyner_triple, water_filling, DistortionPair, Side};
use gwci::realization::{random_diagonal_qw, random_feasible_qw, random_orthogonal};
use gwci::{
    apply_transformation, assemble_joint_covariance, canonical_decomposition, check_pangloss_and_marginal_bounds,
    conditional_independence_gap, linalg, lower_bound_given_qw, minimize_lower_bound, verify_canonical_form,
    wyner_common_information, wyner_lossy_ci, QwParameter, Result, SearchMode,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::commands::{load, Loaded};
use crate::output::{csv, emit, json, Cell};
use crate::{Failure, Format, VerifyArgs};

#[derive(Debug, Serialize)]
struct Suite {
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct Report {
    passed: bool,
    suites: Vec<Suite>,
}

fn suite(name: &'static str, passed: bool, detail: String) -> Suite {
    Suite { name, passed, detail }
}

fn canonical_form(l: &Loaded) -> Suite {
    let r = verify_canonical_form(&l.decomp, &l.pair);
    suite("canonical_form", r.passed, format!("max deviation {:.3e} (tol 1e-8)", r.max_deviation))
}

fn random_nonsingular(p: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let s = DMatrix::from_diagonal(&DVector::from_fn(p, |_, _| rng.gen_range(0.5..2.0)));
    random_orthogonal(p, rng) * s * random_orthogonal(p, rng)
}

fn basis_invariance(l: &Loaded, trials: usize, rng: &mut ChaCha8Rng) -> Result<Suite> {
    let (mut worst_d, mut worst_cw, mut mismatched) = (0.0_f64, 0.0_f64, 0);
    let cw = wyner_common_information(&l.decomp).map(|c| c.value.value()).ok();
    for _ in 0..trials {
        let s1 = random_nonsingular(l.pair.p1(), rng);
        let s2 = random_nonsingular(l.pair.p2(), rng);
        let moved = apply_transformation(&l.pair, &s1, &s2, &l.tol)?;
        let c = canonical_decomposition(&moved, &l.tol)?;
        if c.d.len() != l.decomp.d.len() || c.p11 != l.decomp.p11 {
            mismatched += 1;
            continue;
        }
        for (a, b) in c.d.iter().zip(&l.decomp.d) {
            worst_d = worst_d.max((a - b).abs());
        }
        if let (Some(x), Ok(y)) = (cw, wyner_common_information(&c)) {
            worst_cw = worst_cw.max((x - y.value.value()).abs());
        }
    }
    Ok(suite(
        "basis_invariance",
        mismatched == 0 && worst_d <= 1e-8 && worst_cw <= 1e-8,
        format!("{trials} transforms: max |Δd| {worst_d:.3e}, max |ΔC_W| {worst_cw:.3e} (tol 1e-8), class mismatches {mismatched}"),
    ))
}

fn lower_bound(d: &[f64], rng: &mut ChaCha8Rng, seed: u64) -> Result<Suite> {
    let cw = common_information_from_correlations(d);
    let at_identity = lower_bound_given_qw(d, &QwParameter::identity(d.len()))?.value();
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        worst = worst.min(lower_bound_given_qw(d, &random_feasible_qw(d, 0.0, rng)?)?.value() - cw);
    }
    let full = minimize_lower_bound(d, SearchMode::Full { starts: 10, steps: 30, seed }, 1e-10)?;
    worst = worst.min(full.value.value() - cw);
    let diagonal = minimize_lower_bound(d, SearchMode::Diagonal, 1e-10)?;
    let q_err = diagonal.qw.diagonal().iter().map(|q| (q - 1.0).abs()).fold(0.0, f64::max);
    let id_err = (at_identity - cw).abs();
    Ok(suite(
        "lower_bound",
        id_err <= 1e-12 && worst >= -1e-8 && q_err <= 1e-8,
        format!("|LB(I) - C_W| {id_err:.3e} (tol 1e-12), min search excess {worst:.3e} (floor -1e-8), |q* - 1| {q_err:.3e} (tol 1e-8)"),
    ))
}

fn realization(d: &[f64], trials: usize, rng: &mut ChaCha8Rng) -> Result<Suite> {
    let n = d.len();
    let mut worst_gap = 0.0_f64;
    let mut marginal_mismatch = 0;
    let mut expected = DMatrix::<f64>::identity(2 * n, 2 * n);
    for (j, &dj) in d.iter().enumerate() {
        expected[(j, n + j)] = dj;
        expected[(n + j, j)] = dj;
    }
    for _ in 0..trials {
        let real = assemble_joint_covariance(d, &random_feasible_qw(d, 1e-3, rng)?)?;
        worst_gap = worst_gap.max(conditional_independence_gap(&real)?);
        if real.qs.view((0, 0), (2 * n, 2 * n)) != expected {
            marginal_mismatch += 1;
        }
    }
    Ok(suite(
        "realization",
        worst_gap <= 1e-12 && marginal_mismatch == 0,
        format!("{trials} interior Q_W: max CI gap {worst_gap:.3e} (tol 1e-12), inexact marginal blocks {marginal_mismatch}"),
    ))
}

fn monte_carlo(d: &[f64], samples: usize, seed: u64) -> Result<Suite> {
    let n = d.len();
    let real = assemble_joint_covariance(d, &QwParameter::identity(n))?;
    let cov = linalg::sample_covariance(&gwci::sample(&real, samples, seed));
    let dev = linalg::max_abs_diff(&cov, &real.qs);
    let mi_hat = gaussian_mutual_information(&cov.view((0, 0), (2 * n, 2 * n)).into_owned(), n);
    let mi_err = (mi_hat - mutual_information_from_correlations(d)).abs();
    Ok(suite(
        "monte_carlo",
        dev <= 0.005 && mi_err <= 1e-2,
        format!("N={samples}, seed {seed}: cov deviation {dev:.3e} (tol 0.005), |MI_hat - MI| {mi_err:.3e} (tol 1e-2)"),
    ))
}

fn water_filling_suite(d: &[f64], trials: usize, rng: &mut ChaCha8Rng) -> Result<Suite> {
    let (mut worst_sum, mut over, mut worst_rate) = (0.0_f64, 0, 0.0_f64);
    for _ in 0..trials {
        let q = random_diagonal_qw(d, 0.0, rng)?.diagonal();
        let levels = conditional_levels(d, &q, Side::X1)?;
        let total: f64 = levels.iter().sum();
        let delta = rng.gen_range(0.01..1.2) * total;
        let wf = water_filling(&levels, delta, 1e-12)?;
        worst_sum = worst_sum.max((wf.total() - delta.min(total)).abs());
        over += wf.allocation.iter().zip(&levels).filter(|(a, l)| a > l).count();
        // the allocation must beat every perturbation that keeps the budget
        let rate = conditional_rdf(d, &q, delta)?;
        for i in 0..levels.len() {
            for j in 0..levels.len() {
                if i == j {
                    continue;
                }
                let mut alt = wf.allocation.clone();
                let shift = 1e-3 * alt[i];
                alt[i] -= shift;
                alt[j] += shift;
                let alt_rate: f64 = levels.iter().zip(&alt).map(|(&l, &a)| if l > 0.0 { 0.5 * (l / a).ln().max(0.0) } else { 0.0 }).sum();
                worst_rate = worst_rate.max(rate - alt_rate);
            }
        }
    }
    Ok(suite(
        "water_filling",
        worst_sum <= 1e-10 && over == 0 && worst_rate <= 1e-12,
        format!("{trials} instances: max sum error {worst_sum:.3e} (tol 1e-10), over-level allocations {over}, max gain from a perturbation {worst_rate:.3e}"),
    ))
}

fn interior_grid(d: &[f64], m: usize) -> Vec<DistortionPair> {
    let step = d.iter().map(|v| 1.0 - v).sum::<f64>() / (m + 1) as f64;
    let mut out = Vec::with_capacity(m * m);
    for k1 in 1..=m {
        for k2 in 1..=m {
            out.push(DistortionPair::new(step * k1 as f64, step * k2 as f64).expect("positive grid"));
        }
    }
    out
}

fn pangloss(l: &Loaded, rng: &mut ChaCha8Rng) -> Result<Vec<Suite>> {
    let d = &l.decomp.d;
    let grid = interior_grid(d, 20);
    let identity = QwParameter::identity(d.len());
    let (mut off, mut worst, mut worst_at) = (0, 0.0_f64, (0.0, 0.0));
    let mut worst_marginal = f64::INFINITY;
    for &delta in &grid {
        let p = gray_wyner_triple(&l.decomp, &identity, delta, None)?;
        if p.pangloss_gap.abs() > 1e-6 {
            off += 1;
        }
        if p.pangloss_gap.abs() > worst {
            worst = p.pangloss_gap.abs();
            worst_at = (delta.delta1, delta.delta2);
        }
        let b = check_pangloss_and_marginal_bounds(&p, &l.decomp, delta)?;
        worst_marginal = worst_marginal.min(b.marginal1_slack).min(b.marginal2_slack);
    }
    let bound: f64 = d.iter().map(|v| 1.0 - v).sum();
    let corner = DistortionPair::new(bound, bound)?;
    let mut min_slack = f64::INFINITY;
    for _ in 0..20 {
        let qw = random_diagonal_qw(d, 0.05, rng)?;
        let p = gray_wyner_triple(&l.decomp, &qw, corner, None)?;
        min_slack = min_slack.min(p.pangloss_gap);
        let b = check_pangloss_and_marginal_bounds(&p, &l.decomp, corner)?;
        worst_marginal = worst_marginal.min(b.marginal1_slack).min(b.marginal2_slack);
    }
    let mut region_wrong = 0;
    for (a, b) in [(bound, bound), (bound + 5e-13, 0.1 * bound), (bound + 1e-9, bound), (0.5 * bound, 2.0 * bound)] {
        let r = wyner_lossy_ci(&l.decomp, DistortionPair::new(a, b)?)?;
        if r.in_d_w != (a <= bound + 1e-12 && b <= bound + 1e-12) {
            region_wrong += 1;
        }
    }
    Ok(vec![
        suite(
            "pangloss_identity",
            off == 0,
            format!("q = I on a 20x20 grid inside D_W: {off}/{} points off the plane, max |gap| {worst:.3e} at ({:.4}, {:.4}) (tol 1e-6)", grid.len(), worst_at.0, worst_at.1),
        ),
        suite("pangloss_strict_off_optimum", min_slack > 1e-6, format!("20 random diagonal q != I at the D_W corner: min slack {min_slack:.3e} (must exceed 1e-6)")),
        suite("marginal_bounds", worst_marginal >= -1e-8, format!("min marginal slack {worst_marginal:.3e} (floor -1e-8)")),
        suite("region_membership", region_wrong == 0, format!("{region_wrong} boundary probes misclassified (tol 1e-12)")),
    ])
}

fn suites(args: &VerifyArgs, l: &Loaded) -> Result<Vec<Suite>> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut out = vec![canonical_form(l), basis_invariance(l, args.trials, &mut rng)?];
    if l.decomp.has_identical_part() {
        out.push(suite("information", true, format!("identical part (p11 = {}): rates are infinite, rate suites skipped", l.decomp.p11)));
        return Ok(out);
    }
    let d = &l.decomp.d;
    if d.is_empty() {
        out.push(suite("information", true, "no correlated part: every rate suite is trivial".into()));
        return Ok(out);
    }
    out.push(lower_bound(d, &mut rng, args.seed)?);
    out.push(realization(d, args.trials, &mut rng)?);
    if args.samples > 0 {
        out.push(monte_carlo(d, args.samples, args.seed)?);
    }
    out.push(water_filling_suite(d, args.trials, &mut rng)?);
    out.extend(pangloss(l, &mut rng)?);
    Ok(out)
}

pub fn run(args: &VerifyArgs) -> std::result::Result<(), Failure> {
    let l = load(&args.common)?;
    let suites = suites(args, &l)?;
    let passed = suites.iter().all(|s| s.passed);
    for s in &suites {
        eprintln!("{} {}: {}", if s.passed { "PASS" } else { "FAIL" }, s.name, s.detail);
    }
    let text = match args.common.format.unwrap_or(Format::Json) {
        Format::Json => json(&Report { passed, suites }),
        Format::Csv => {
            let rows: Vec<Vec<Cell>> = suites
                .into_iter()
                .map(|s| vec![Cell::Text(s.name.into()), Cell::Bool(s.passed), Cell::Text(s.detail)])
                .collect();
            csv(&["suite", "passed", "detail"], &rows)
        }
    };
    emit(&text, args.common.output.as_deref())?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}
