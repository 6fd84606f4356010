//! Jointly Gaussian source pairs `(X1, X2) ~ G(0, Q)` and numeric tolerances.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{rows_to_matrix, MatrixRows};
use crate::linalg;

/// Floating-point thresholds used across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericTolerances {
    /// Largest tolerated asymmetry of a raw covariance, relative to `max(1, max|Q|)`.
    pub sym_tol: f64,
    /// Smallest eigenvalue may be as low as `-psd_tol * λ_max`.
    pub psd_tol: f64,
    /// Relative eigenvalue cutoff for the effective rank.
    pub rank_tol: f64,
    /// Canonical correlations `>= 1 - one_tol` are identical information.
    pub one_tol: f64,
    /// Canonical correlations `<= zero_tol` are private information.
    pub zero_tol: f64,
    /// Convergence tolerance for scalar minimization and bisection.
    pub opt_tol: f64,
}

impl Default for NumericTolerances {
    fn default() -> Self {
        Self {
            sym_tol: 1e-12,
            psd_tol: 1e-10,
            rank_tol: 1e-10,
            one_tol: 1e-9,
            zero_tol: 1e-12,
            opt_tol: 1e-10,
        }
    }
}

impl NumericTolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.sym_tol,
            self.psd_tol,
            self.rank_tol,
            self.one_tol,
            self.zero_tol,
            self.opt_tol,
        ];
        if all.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidInput("tolerances must be finite and nonnegative".into()));
        }
        if !(self.zero_tol > 0.0 && self.zero_tol < 1.0 - self.one_tol) {
            return Err(Error::InvalidInput(
                "need 0 < zero_tol < 1 - one_tol so the classification bands are disjoint".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    X1,
    X2,
    Cross,
}

/// A validated jointly Gaussian pair. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct JointGaussianPair {
    p1: usize,
    p2: usize,
    q: DMatrix<f64>,
    rank1: usize,
    rank2: usize,
}

/// Validate a raw joint covariance and symmetrize it.
pub fn validate_joint_covariance(
    raw: &DMatrix<f64>,
    p1: usize,
    p2: usize,
    tol: &NumericTolerances,
) -> Result<JointGaussianPair> {
    tol.validate()?;
    if p1 == 0 || p2 == 0 {
        return Err(Error::DimensionMismatch {
            expected: "p1 >= 1 and p2 >= 1".into(),
            found: format!("p1 = {p1}, p2 = {p2}"),
        });
    }
    let order = p1 + p2;
    if raw.nrows() != order || raw.ncols() != order {
        return Err(Error::DimensionMismatch {
            expected: format!("{order}x{order}"),
            found: format!("{}x{}", raw.nrows(), raw.ncols()),
        });
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("covariance entries must be finite".into()));
    }
    let scale = linalg::max_abs(raw).max(1.0);
    let asym = linalg::max_asymmetry(raw);
    if asym > tol.sym_tol * scale {
        return Err(Error::AsymmetryTooLarge { max_asymmetry: asym });
    }
    let q = linalg::symmetrize(raw);
    let eig = linalg::sym_eigen(&q);
    let lmin = eig.values[0];
    let lmax = eig.values[order - 1];
    if lmin < -tol.psd_tol * lmax.max(0.0) {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: lmin,
            max_eigenvalue: lmax,
        });
    }
    let q1 = q.view((0, 0), (p1, p1)).into_owned();
    let q2 = q.view((p1, p1), (p2, p2)).into_owned();
    Ok(JointGaussianPair {
        p1,
        p2,
        rank1: linalg::rank(&q1, tol.rank_tol),
        rank2: linalg::rank(&q2, tol.rank_tol),
        q,
    })
}

impl JointGaussianPair {
    pub fn p1(&self) -> usize {
        self.p1
    }

    pub fn p2(&self) -> usize {
        self.p2
    }

    /// The full symmetrized covariance.
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Effective dimensions `(rank Q_X1, rank Q_X2)`.
    pub fn ranks(&self) -> (usize, usize) {
        (self.rank1, self.rank2)
    }

    pub fn is_rank_deficient(&self) -> bool {
        self.rank1 < self.p1 || self.rank2 < self.p2
    }

    pub fn block(&self, which: Block) -> DMatrix<f64> {
        let (p1, p2) = (self.p1, self.p2);
        match which {
            Block::X1 => self.q.view((0, 0), (p1, p1)).into_owned(),
            Block::X2 => self.q.view((p1, p1), (p2, p2)).into_owned(),
            Block::Cross => self.q.view((0, p1), (p1, p2)).into_owned(),
        }
    }

    pub fn to_file(&self) -> CovarianceFile {
        CovarianceFile {
            p1: self.p1,
            p2: self.p2,
            q: crate::io::matrix_to_rows(&self.q),
        }
    }
}

/// On-disk covariance description: `{"p1": .., "p2": .., "Q": [[..], ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceFile {
    pub p1: usize,
    pub p2: usize,
    #[serde(rename = "Q")]
    pub q: MatrixRows,
}

impl CovarianceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("covariance JSON: {e}")))
    }

    pub fn into_pair(self, tol: &NumericTolerances) -> Result<JointGaussianPair> {
        let raw = rows_to_matrix(&self.q)?;
        validate_joint_covariance(&raw, self.p1, self.p2, tol)
    }
}
