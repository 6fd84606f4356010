use std::fmt;

use thiserror::Error;

/// Which side of `D <= Q_W <= D^{-1}` a candidate violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeasibleSide {
    Lower,
    Upper,
}

impl fmt::Display for FeasibleSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeasibleSide::Lower => f.write_str("lower (Q_W - D)"),
            FeasibleSide::Upper => f.write_str("upper (D^-1 - Q_W)"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e} (largest {max_eigenvalue:e})")]
    NotPositiveSemidefinite {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("matrix asymmetry {max_asymmetry:e} exceeds tolerance")]
    AsymmetryTooLarge { max_asymmetry: f64 },

    #[error("marginal covariance of X{which} is rank deficient (rank {rank} < {dim}) and rank reduction is disabled")]
    RankDeficientMarginal { which: u8, rank: usize, dim: usize },

    #[error("singular value decomposition failed to converge")]
    DegenerateSvd,

    #[error("transformation is numerically singular (condition number {condition:e})")]
    SingularTransformation { condition: f64 },

    #[error("Q_W is infeasible on the {side} side: eigenvalue {eigenvalue:e}")]
    InfeasibleQw { side: FeasibleSide, eigenvalue: f64 },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("Q_W is singular")]
    SingularQw,

    #[error("identical part present (p11 = {p11}): mutual and common information are infinite")]
    IdenticalPartPresent { p11: usize },

    #[error("distortion must be positive, got {0}")]
    NonpositiveDistortion(f64),

    #[error("joint RDF oracle disagreement: analytic {analytic} vs grid {grid}")]
    OracleDisagreement { analytic: f64, grid: f64 },

    #[error("weights out of range: alpha1 = {alpha1}, alpha2 = {alpha2} (need 0 <= alpha_i <= 1 and alpha1 + alpha2 >= 1)")]
    WeightsOutOfRange { alpha1: f64, alpha2: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
