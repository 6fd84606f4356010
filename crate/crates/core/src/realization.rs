//! Conditionally independent Gaussian realizations of a canonical pair.
//!
//! For canonical correlations `D = Diag(d)` and any symmetric `Q_W` with
//! `D <= Q_W <= D^{-1}`, the triple
//!
//! ```text
//!   X12 = D^{1/2} Q_W^{-1} W + Z1,   Z1 ~ G(0, I - D^{1/2} Q_W^{-1} D^{1/2})
//!   X22 = D^{1/2} W + Z2,            Z2 ~ G(0, I - D^{1/2} Q_W D^{1/2})
//!   W ~ G(0, Q_W),   (Z1, Z2, W) independent
//! ```
//!
//! reproduces `Cov(X12, X22) = [[I, D], [D, I]]` and makes `X12`, `X22`
//! conditionally independent given `W`, with `dim W = n`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::canonical::CanonicalDecomposition;
use crate::error::{Error, FeasibleSide, Result};
use crate::io::{matrix_to_rows, MatrixRows};
use crate::linalg;

/// Eigenvalue slack for membership in `D <= Q_W <= D^{-1}`.
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// A validated `Q_W` in the feasible set.
#[derive(Debug, Clone, PartialEq)]
pub struct QwParameter {
    matrix: DMatrix<f64>,
    lower_slack: f64,
    upper_slack: f64,
}

impl QwParameter {
    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
            lower_slack: f64::NAN,
            upper_slack: f64::NAN,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// Smallest eigenvalue of `Q_W - D`.
    pub fn lower_slack(&self) -> f64 {
        self.lower_slack
    }

    /// Smallest eigenvalue of `D^{-1} - Q_W`.
    pub fn upper_slack(&self) -> f64 {
        self.upper_slack
    }

    /// True when `Q_W` touches `D` or `D^{-1}`.
    pub fn is_boundary(&self) -> bool {
        self.lower_slack <= FEASIBILITY_TOL || self.upper_slack <= FEASIBILITY_TOL
    }

    pub fn is_diagonal(&self) -> bool {
        linalg::is_diagonal(&self.matrix, 0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().copied().collect()
    }
}

pub(crate) fn check_correlations(d: &[f64]) -> Result<()> {
    if d.iter().any(|v| !(v.is_finite() && *v > 0.0 && *v < 1.0)) {
        return Err(Error::InvalidInput(format!(
            "canonical correlations must lie in (0, 1), got {d:?}"
        )));
    }
    Ok(())
}

fn diag(values: impl Iterator<Item = f64>, n: usize) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_iterator(n, values))
}

/// Check `D <= Q_W <= D^{-1}` and wrap the (symmetrized) candidate.
pub fn validate_qw(d: &[f64], candidate: &DMatrix<f64>) -> Result<QwParameter> {
    check_correlations(d)?;
    let n = d.len();
    if candidate.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n}"),
            found: format!("{}x{}", candidate.nrows(), candidate.ncols()),
        });
    }
    if candidate.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("Q_W entries must be finite".into()));
    }
    let matrix = linalg::symmetrize(candidate);
    let dm = diag(d.iter().copied(), n);
    let dinv = diag(d.iter().map(|v| 1.0 / v), n);
    let lower_slack = linalg::min_eigenvalue(&(&matrix - &dm));
    let upper_slack = linalg::min_eigenvalue(&(&dinv - &matrix));
    if lower_slack < -FEASIBILITY_TOL {
        return Err(Error::InfeasibleQw { side: FeasibleSide::Lower, eigenvalue: lower_slack });
    }
    if upper_slack < -FEASIBILITY_TOL {
        return Err(Error::InfeasibleQw { side: FeasibleSide::Upper, eigenvalue: upper_slack });
    }
    Ok(QwParameter { matrix, lower_slack, upper_slack })
}

/// Diagonal `Q_W = Diag(q)`.
pub fn diagonal_qw(d: &[f64], q: &[f64]) -> Result<QwParameter> {
    if q.len() != d.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} diagonal entries", d.len()),
            found: q.len().to_string(),
        });
    }
    validate_qw(d, &diag(q.iter().copied(), q.len()))
}

/// A uniformly random orthogonal matrix (QR of a Gaussian matrix, sign-corrected).
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random feasible `Q_W = D + G M Gᵀ` with `G = (D^{-1} - D)^{1/2}` and
/// `M = V Diag(u) Vᵀ`, `u` uniform in `[margin, 1 - margin]`.
/// `margin > 0` keeps the draw strictly interior.
pub fn random_feasible_qw<R: Rng>(d: &[f64], margin: f64, rng: &mut R) -> Result<QwParameter> {
    check_correlations(d)?;
    let n = d.len();
    let g = diag(d.iter().map(|v| (1.0 / v - v).sqrt()), n);
    let v = random_orthogonal(n, rng);
    let u = DVector::from_fn(n, |_, _| rng.gen_range(margin..=1.0 - margin));
    let m = &v * DMatrix::from_diagonal(&u) * v.transpose();
    let q = diag(d.iter().copied(), n) + &g * m * &g;
    validate_qw(d, &linalg::symmetrize(&q))
}

/// Random interior diagonal `Q_W` with `q_j` drawn log-uniformly inside `[d_j, 1/d_j]`.
pub fn random_diagonal_qw<R: Rng>(d: &[f64], margin: f64, rng: &mut R) -> Result<QwParameter> {
    check_correlations(d)?;
    let q: Vec<f64> = d
        .iter()
        .map(|&dj| {
            let span = -dj.ln();
            let t: f64 = rng.gen_range(-1.0 + margin..=1.0 - margin);
            (t * span).exp()
        })
        .collect();
    diagonal_qw(d, &q)
}

/// Realization matrices and the joint covariance of `(X12, X22, W)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakRealization {
    pub d: Vec<f64>,
    pub qw: QwParameter,
    /// Gain of `W` in `X12`: `D^{1/2} Q_W^{-1}`.
    pub a1: DMatrix<f64>,
    pub cov_z1: DMatrix<f64>,
    /// Gain of `W` in `X22`: `D^{1/2}`.
    pub a2: DMatrix<f64>,
    pub cov_z2: DMatrix<f64>,
    /// `3n x 3n` covariance of `(X12, X22, W)`.
    pub qs: DMatrix<f64>,
    /// Set when `Q_W` is on the boundary and a noise covariance is singular.
    pub degenerate: bool,
}

pub fn assemble_joint_covariance(d: &[f64], qw: &QwParameter) -> Result<WeakRealization> {
    check_correlations(d)?;
    let n = d.len();
    if qw.n() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n} Q_W"),
            found: format!("{}x{}", qw.n(), qw.n()),
        });
    }
    let q = qw.matrix();
    let dm = diag(d.iter().copied(), n);
    let dh = diag(d.iter().map(|v| v.sqrt()), n);
    let q_inv = q.clone().cholesky().ok_or(Error::SingularQw)?.inverse();
    let q_inv = linalg::symmetrize(&q_inv);
    let eye = DMatrix::<f64>::identity(n, n);

    let a1 = &dh * &q_inv;
    let cov_z1 = linalg::symmetrize(&(&eye - &dh * &q_inv * &dh));
    let a2 = dh.clone();
    let cov_z2 = linalg::symmetrize(&(&eye - &dh * q * &dh));
    let m1 = linalg::min_eigenvalue(&cov_z1);
    let m2 = linalg::min_eigenvalue(&cov_z2);
    if m1 < -FEASIBILITY_TOL || m2 < -FEASIBILITY_TOL {
        return Err(Error::NumericalBreakdown(format!(
            "noise covariance not PSD (min eigenvalues {m1:e}, {m2:e})"
        )));
    }

    let mut qs = DMatrix::zeros(3 * n, 3 * n);
    let mut put = |r: usize, c: usize, block: &DMatrix<f64>| {
        qs.view_mut((r * n, c * n), (n, n)).copy_from(block);
    };
    put(0, 0, &eye);
    put(0, 1, &dm);
    put(1, 0, &dm);
    put(1, 1, &eye);
    put(0, 2, &dh);
    put(2, 0, &dh);
    put(1, 2, &(&dh * q));
    put(2, 1, &(q * &dh));
    put(2, 2, q);

    Ok(WeakRealization {
        d: d.to_vec(),
        qw: qw.clone(),
        a1,
        cov_z1,
        a2,
        cov_z2,
        qs,
        degenerate: m1 <= FEASIBILITY_TOL || m2 <= FEASIBILITY_TOL,
    })
}

impl WeakRealization {
    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// Covariance of `(X12, X22, W)` implied by the gains and noise covariances.
    pub fn implied_covariance(&self) -> DMatrix<f64> {
        let n = self.n();
        let q = self.qw.matrix();
        let mut out = DMatrix::zeros(3 * n, 3 * n);
        let blocks = [
            (0, 0, &self.a1 * q * self.a1.transpose() + &self.cov_z1),
            (0, 1, &self.a1 * q * self.a2.transpose()),
            (1, 1, &self.a2 * q * self.a2.transpose() + &self.cov_z2),
            (0, 2, &self.a1 * q),
            (1, 2, &self.a2 * q),
            (2, 2, q.clone()),
        ];
        for (r, c, b) in blocks {
            out.view_mut((r * n, c * n), (n, n)).copy_from(&b);
            out.view_mut((c * n, r * n), (n, n)).copy_from(&b.transpose());
        }
        out
    }

    pub fn to_json(&self) -> RealizationJson {
        RealizationJson {
            a1: matrix_to_rows(&self.a1),
            cov_z1: matrix_to_rows(&self.cov_z1),
            a2: matrix_to_rows(&self.a2),
            cov_z2: matrix_to_rows(&self.cov_z2),
            qw: matrix_to_rows(self.qw.matrix()),
            qs: matrix_to_rows(&self.qs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationJson {
    #[serde(rename = "A1")]
    pub a1: MatrixRows,
    #[serde(rename = "covZ1")]
    pub cov_z1: MatrixRows,
    #[serde(rename = "A2")]
    pub a2: MatrixRows,
    #[serde(rename = "covZ2")]
    pub cov_z2: MatrixRows,
    #[serde(rename = "Qw")]
    pub qw: MatrixRows,
    #[serde(rename = "Qs")]
    pub qs: MatrixRows,
}

/// Largest entry of `Q_{X12,X22} - Q_{X12,W} Q_W^{-1} Q_{W,X22}`.
///
/// The target cross-covariance is read from `Q_s`; the covariances with `W`
/// come from the realization gains, so a corrupted gain shows up here.
pub fn conditional_independence_gap(real: &WeakRealization) -> Result<f64> {
    let n = real.n();
    let q = real.qw.matrix();
    let chol = q.clone().cholesky().ok_or(Error::SingularQw)?;
    let target = real.qs.view((0, n), (n, n)).into_owned();
    let x12_w = &real.a1 * q;
    let w_x22 = q * real.a2.transpose();
    let explained = &x12_w * chol.solve(&w_x22);
    Ok(linalg::max_abs_diff(&target, &explained))
}

/// Draw `count` rows `(X12, X22, W)` from the realization, deterministic per seed.
pub fn sample(real: &WeakRealization, count: usize, seed: u64) -> DMatrix<f64> {
    let n = real.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let root_w = linalg::psd_sqrt(real.qw.matrix(), 1e-14);
    let root_z1 = linalg::psd_sqrt(&real.cov_z1, 1e-14);
    let root_z2 = linalg::psd_sqrt(&real.cov_z2, 1e-14);
    let mut xi = DMatrix::<f64>::zeros(count, 3 * n);
    for i in 0..count {
        for j in 0..3 * n {
            xi[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let w = xi.columns(0, n) * root_w.transpose();
    let z1 = xi.columns(n, n) * root_z1.transpose();
    let z2 = xi.columns(2 * n, n) * root_z2.transpose();
    let x12 = &w * real.a1.transpose() + z1;
    let x22 = &w * real.a2.transpose() + z2;
    let mut out = DMatrix::zeros(count, 3 * n);
    out.columns_mut(0, n).copy_from(&x12);
    out.columns_mut(n, n).copy_from(&x22);
    out.columns_mut(2 * n, n).copy_from(&w);
    out
}

/// CSV header for [`sample`] output.
pub fn sample_header(n: usize) -> Vec<String> {
    let mut cols = Vec::with_capacity(3 * n);
    for prefix in ["x12", "x22", "w"] {
        cols.extend((1..=n).map(|j| format!("{prefix}_{j}")));
    }
    cols
}

/// Map canonical samples back to the original coordinates of `(X1, X2)`.
///
/// Private coordinates are filled with fresh independent unit Gaussians
/// (seeded by `seed`); zero-variance coordinates stay at zero.
pub fn lift_to_original(decomp: &CanonicalDecomposition, samples: &DMatrix<f64>, seed: u64) -> Result<DMatrix<f64>> {
    if decomp.has_identical_part() {
        return Err(Error::IdenticalPartPresent { p11: decomp.p11 });
    }
    let n = decomp.n();
    if samples.ncols() != 3 * n {
        return Err(Error::DimensionMismatch {
            expected: format!("{} sample columns", 3 * n),
            found: samples.ncols().to_string(),
        });
    }
    let (p1, p2) = (decomp.p1(), decomp.p2());
    let count = samples.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c1 = DMatrix::zeros(count, p1);
    let mut c2 = DMatrix::zeros(count, p2);
    c1.columns_mut(0, n).copy_from(&samples.columns(0, n));
    c2.columns_mut(0, n).copy_from(&samples.columns(n, n));
    for i in 0..count {
        for j in n..decomp.rank1 {
            c1[(i, j)] = rng.sample(StandardNormal);
        }
        for j in n..decomp.rank2 {
            c2[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let s1_inv = linalg::inverse(&decomp.s1)?;
    let s2_inv = linalg::inverse(&decomp.s2)?;
    let x1 = c1 * s1_inv.transpose();
    let x2 = c2 * s2_inv.transpose();
    let mut out = DMatrix::zeros(count, p1 + p2);
    out.columns_mut(0, p1).copy_from(&x1);
    out.columns_mut(p1, p2).copy_from(&x2);
    Ok(out)
}
