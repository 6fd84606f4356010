#![allow(dead_code)]

use gwci::{
    canonical_decomposition, validate_joint_covariance, CanonicalDecomposition, DistortionPair, JointGaussianPair,
    NumericTolerances,
};
use nalgebra::DMatrix;
use rand::Rng;

/// Joint covariance already in canonical form: `n` correlated pairs with
/// correlations `d`, then `k1` / `k2` private coordinates.
pub fn canonical_covariance(d: &[f64], k1: usize, k2: usize) -> DMatrix<f64> {
    let n = d.len();
    let (p1, p2) = (n + k1, n + k2);
    let mut q = DMatrix::identity(p1 + p2, p1 + p2);
    for (j, &dj) in d.iter().enumerate() {
        q[(j, p1 + j)] = dj;
        q[(p1 + j, j)] = dj;
    }
    q
}

pub fn canonical_pair(d: &[f64], k1: usize, k2: usize) -> JointGaussianPair {
    let q = canonical_covariance(d, k1, k2);
    validate_joint_covariance(&q, d.len() + k1, d.len() + k2, &NumericTolerances::default()).unwrap()
}

pub fn decomposition(d: &[f64]) -> CanonicalDecomposition {
    canonical_decomposition(&canonical_pair(d, 0, 0), &NumericTolerances::default()).unwrap()
}

/// Correlations drawn uniformly from `[0.05, 0.95]`.
pub fn random_correlations<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.05..0.95)).collect()
}

/// Well-conditioned random nonsingular matrix `U Diag(s) V` with `s` in `[0.5, 2]`.
pub fn random_nonsingular<R: Rng>(p: usize, rng: &mut R) -> DMatrix<f64> {
    let u = gwci::realization::random_orthogonal(p, rng);
    let v = gwci::realization::random_orthogonal(p, rng);
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(p, |_, _| rng.gen_range(0.5..2.0)));
    u * s * v
}

pub fn dp(a: f64, b: f64) -> DistortionPair {
    DistortionPair::new(a, b).unwrap()
}

/// `(Δ1, Δ2) = B (k1, k2) / (m + 1)` for `k_i = 1..m`: an `m × m` grid strictly inside
/// `D_W`, where `B = Σ (1 - d_j)`.
pub fn interior_grid(d: &[f64], m: usize) -> Vec<DistortionPair> {
    let bound: f64 = d.iter().map(|v| 1.0 - v).sum();
    let mut out = Vec::with_capacity(m * m);
    for k1 in 1..=m {
        for k2 in 1..=m {
            let step = bound / (m + 1) as f64;
            out.push(dp(step * k1 as f64, step * k2 as f64));
        }
    }
    out
}

/// `½ Σ ln⁺(ℓ_j / δ_j)` for an explicit allocation.
pub fn allocation_rate(levels: &[f64], alloc: &[f64]) -> f64 {
    levels
        .iter()
        .zip(alloc)
        .map(|(&l, &a)| if l <= 0.0 { 0.0 } else { 0.5 * (l / a).ln().max(0.0) })
        .sum()
}

/// Minimizes `allocation_rate` over `Σ δ_j = Δ`, `δ_j > 0`, by a zoomed grid on the
/// first `k - 1` coordinates. Independent of the library's water-filling.
pub fn dense_grid_min(levels: &[f64], delta: f64) -> f64 {
    let k = levels.len();
    let total: f64 = levels.iter().sum();
    let budget = delta.min(total);
    if k == 1 {
        return allocation_rate(levels, &[budget]);
    }
    let dims = k - 1;
    let res: usize = if dims == 1 { 201 } else { 41 };
    let mut lo = vec![0.0; dims];
    let mut hi = vec![budget; dims];
    let mut best = f64::INFINITY;
    let mut best_x = vec![0.0; dims];
    let mut x = vec![0.0; dims];
    for _ in 0..200 {
        let steps: Vec<f64> = (0..dims).map(|i| (hi[i] - lo[i]) / (res - 1) as f64).collect();
        for idx in 0..res.pow(dims as u32) {
            let mut rem = idx;
            for i in 0..dims {
                x[i] = lo[i] + steps[i] * (rem % res) as f64;
                rem /= res;
            }
            let used: f64 = x.iter().sum();
            let last = budget - used;
            if last <= 0.0 || x.iter().any(|&v| v <= 0.0) {
                continue;
            }
            let mut alloc = x.clone();
            alloc.push(last);
            let v = allocation_rate(levels, &alloc);
            if v < best {
                best = v;
                best_x.copy_from_slice(&x);
            }
        }
        if steps.iter().cloned().fold(0.0, f64::max) < 1e-14 {
            break;
        }
        for i in 0..dims {
            lo[i] = (best_x[i] - 2.0 * steps[i]).max(0.0);
            hi[i] = (best_x[i] + 2.0 * steps[i]).min(budget);
        }
    }
    best
}
