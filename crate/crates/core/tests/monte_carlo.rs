mod common;

use common::*;
use gwci::realization::sample_header;
use gwci::{
    assemble_joint_covariance, canonical_decomposition, lift_to_original, linalg, sample, validate_joint_covariance,
    NumericTolerances, QwParameter,
};
use nalgebra::DMatrix;

const N: usize = 1_000_000;
const CLT_TOL: f64 = 0.005;

fn lifted_covariance(q: &DMatrix<f64>, p1: usize, p2: usize, seed: u64) -> DMatrix<f64> {
    let tol = NumericTolerances::default();
    let pair = validate_joint_covariance(q, p1, p2, &tol).unwrap();
    let c = canonical_decomposition(&pair, &tol).unwrap();
    let real = assemble_joint_covariance(&c.d, &QwParameter::identity(c.n())).unwrap();
    let xs = sample(&real, N, seed);
    linalg::sample_covariance(&lift_to_original(&c, &xs, seed + 1).unwrap())
}

#[test]
fn lifted_scaled_scalar_pair() {
    let q = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 1.0]);
    let cov = lifted_covariance(&q, 1, 1, 42);
    // X1 has standard deviation 2, so the entrywise tolerance scales with it
    assert!(linalg::max_abs_diff(&cov, &q) <= 4.0 * CLT_TOL, "{cov}");
}

#[test]
fn lifted_pair_with_private_component() {
    // X1 = (correlated, private), X2 scalar
    let q = canonical_covariance(&[0.6], 1, 0);
    let cov = lifted_covariance(&q, 2, 1, 7);
    assert!((cov[(1, 1)] - 1.0).abs() <= CLT_TOL);
    assert!(linalg::max_abs_diff(&cov, &q) <= CLT_TOL, "{cov}");
}

#[test]
fn canonical_input_lifts_to_itself() {
    let d = [0.7, 0.2];
    let tol = NumericTolerances::default();
    let c = canonical_decomposition(&canonical_pair(&d, 0, 0), &tol).unwrap();
    let real = assemble_joint_covariance(&c.d, &QwParameter::identity(2)).unwrap();
    let xs = sample(&real, 1000, 3);
    let lifted = lift_to_original(&c, &xs, 4).unwrap();
    assert!(linalg::max_abs_diff(&lifted, &xs.columns(0, 4).into_owned()) < 1e-12);
}

#[test]
fn sampling_is_deterministic_and_shaped() {
    let real = assemble_joint_covariance(&[0.9, 0.3], &QwParameter::identity(2)).unwrap();
    assert_eq!(sample(&real, 0, 1).shape(), (0, 6));
    let a = sample(&real, 500, 99);
    let b = sample(&real, 500, 99);
    assert!(a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_ne!(a, sample(&real, 500, 100));
    assert_eq!(sample_header(2), ["x12_1", "x12_2", "x22_1", "x22_2", "w_1", "w_2"]);
}
