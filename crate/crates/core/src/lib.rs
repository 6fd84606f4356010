//! Canonical variable form, Wyner common information and Gray-Wyner rate
//! points for a pair of jointly Gaussian vector sources under square-error
//! distortion.
//!
//! The usual flow is
//!
//! 1. [`validate_joint_covariance`] the joint covariance of `(X1, X2)`,
//! 2. [`canonical_decomposition`] to get the canonical correlations `d`,
//! 3. [`wyner_common_information`], [`assemble_joint_covariance`] or
//!    [`gray_wyner_triple`] on the correlated part.
//!
//! Rates are in nats unless converted with [`Unit`].

pub mod canonical;
pub mod error;
pub mod information;
pub mod io;
pub mod linalg;
pub mod model;
pub mod optimize;
pub mod rate_region;
pub mod realization;

pub use canonical::{
    apply_transformation, canonical_decomposition, canonical_decomposition_with, verify_canonical_form,
    CanonicalDecomposition, CanonicalReport, RankPolicy,
};
pub use error::{Error, FeasibleSide, Result};
pub use information::{
    lower_bound_given_qw, minimize_lower_bound, mutual_information, wyner_common_information, CommonInformation,
    ExtendedRate, SearchMode, Unit,
};
pub use model::{validate_joint_covariance, Block, CovarianceFile, JointGaussianPair, NumericTolerances};
pub use rate_region::{
    check_pangloss_and_marginal_bounds, conditional_rdf, gray_wyner_triple, joint_rdf_oracle, marginal_rdf,
    water_filling, weighted_functional, wyner_lossy_ci, DistortionPair, RateRegionPoint, WaterFillingAllocation,
};
pub use realization::{
    assemble_joint_covariance, conditional_independence_gap, lift_to_original, sample, validate_qw, QwParameter,
    WeakRealization,
};
