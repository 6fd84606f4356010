//! Canonical variable form of a jointly Gaussian pair.
//!
//! The pair is whitened block by block and the normalized cross-covariance is
//! diagonalized by an SVD. In the new coordinates each source has identity
//! covariance on its range and the cross-covariance couples coordinate `i` of
//! `X1` only with coordinate `i` of `X2`:
//!
//! ```text
//!   X1 = (X11, X12, X13)    identical | correlated | private
//!   X2 = (X21, X22, X23)
//!   E[X11 X21ᵀ] = I_{p11},  E[X12 X22ᵀ] = Diag(d),  everything else zero
//! ```
//!
//! Negative correlations are absorbed into `S2`, so every `d_i` is positive.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{matrix_to_rows, rows_to_matrix, MatrixRows};
use crate::linalg;
use crate::model::{Block, JointGaussianPair, NumericTolerances};

/// Deviation allowed between a transformed covariance and the canonical template.
pub const CANONICAL_TOL: f64 = 1e-8;

/// Transformations above this condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// What to do when a marginal covariance is singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankPolicy {
    /// Restrict to the range; null directions are appended to the private part.
    #[default]
    Reduce,
    Reject,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalDecomposition {
    pub s1: DMatrix<f64>,
    pub s2: DMatrix<f64>,
    /// Canonical correlations of the correlated part, decreasing, in `(0, 1)`.
    pub d: Vec<f64>,
    pub p11: usize,
    pub p12: usize,
    pub p13: usize,
    pub p21: usize,
    pub p22: usize,
    pub p23: usize,
    /// Effective ranks of `Q_X1`, `Q_X2`. Coordinates past the rank have zero variance.
    pub rank1: usize,
    pub rank2: usize,
}

impl CanonicalDecomposition {
    /// Number of correlated components.
    pub fn n(&self) -> usize {
        self.p12
    }

    pub fn p1(&self) -> usize {
        self.p11 + self.p12 + self.p13
    }

    pub fn p2(&self) -> usize {
        self.p21 + self.p22 + self.p23
    }

    pub fn has_identical_part(&self) -> bool {
        self.p11 > 0
    }

    /// Covariance the transformed pair should have.
    pub fn template(&self) -> DMatrix<f64> {
        let (p1, p2) = (self.p1(), self.p2());
        let mut t = DMatrix::zeros(p1 + p2, p1 + p2);
        for i in 0..self.rank1 {
            t[(i, i)] = 1.0;
        }
        for j in 0..self.rank2 {
            t[(p1 + j, p1 + j)] = 1.0;
        }
        for i in 0..self.p11 {
            t[(i, p1 + i)] = 1.0;
            t[(p1 + i, i)] = 1.0;
        }
        for (k, &dk) in self.d.iter().enumerate() {
            let i = self.p11 + k;
            t[(i, p1 + i)] = dk;
            t[(p1 + i, i)] = dk;
        }
        t
    }

    pub fn to_json(&self) -> CanonicalJson {
        CanonicalJson {
            s1: matrix_to_rows(&self.s1),
            s2: matrix_to_rows(&self.s2),
            d: self.d.clone(),
            p11: self.p11,
            p12: self.p12,
            p13: self.p13,
            p21: self.p21,
            p22: self.p22,
            p23: self.p23,
        }
    }
}

/// Serialized form of a [`CanonicalDecomposition`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalJson {
    #[serde(rename = "S1")]
    pub s1: MatrixRows,
    #[serde(rename = "S2")]
    pub s2: MatrixRows,
    pub d: Vec<f64>,
    pub p11: usize,
    pub p12: usize,
    pub p13: usize,
    pub p21: usize,
    pub p22: usize,
    pub p23: usize,
}

impl CanonicalJson {
    /// Rebuild a decomposition, assuming full-rank marginals.
    pub fn into_decomposition(self) -> Result<CanonicalDecomposition> {
        let s1 = rows_to_matrix(&self.s1)?;
        let s2 = rows_to_matrix(&self.s2)?;
        let (p1, p2) = (self.p11 + self.p12 + self.p13, self.p21 + self.p22 + self.p23);
        if s1.shape() != (p1, p1) || s2.shape() != (p2, p2) || self.d.len() != self.p12 || self.p11 != self.p21 || self.p12 != self.p22 {
            return Err(Error::InvalidInput("inconsistent canonical decomposition".into()));
        }
        Ok(CanonicalDecomposition {
            s1,
            s2,
            d: self.d,
            p11: self.p11,
            p12: self.p12,
            p13: self.p13,
            p21: self.p21,
            p22: self.p22,
            p23: self.p23,
            rank1: p1,
            rank2: p2,
        })
    }
}

pub fn canonical_decomposition(pair: &JointGaussianPair, tol: &NumericTolerances) -> Result<CanonicalDecomposition> {
    canonical_decomposition_with(pair, tol, RankPolicy::Reduce)
}

pub fn canonical_decomposition_with(
    pair: &JointGaussianPair,
    tol: &NumericTolerances,
    policy: RankPolicy,
) -> Result<CanonicalDecomposition> {
    let (p1, p2) = (pair.p1(), pair.p2());
    if policy == RankPolicy::Reject {
        let (r1, r2) = pair.ranks();
        if r1 < p1 {
            return Err(Error::RankDeficientMarginal { which: 1, rank: r1, dim: p1 });
        }
        if r2 < p2 {
            return Err(Error::RankDeficientMarginal { which: 2, rank: r2, dim: p2 });
        }
    }

    let (e1, l1, null1) = linalg::range_split(&pair.block(Block::X1), tol.rank_tol);
    let (e2, l2, null2) = linalg::range_split(&pair.block(Block::X2), tol.rank_tol);
    let whiten = |e: &DMatrix<f64>, l: &DVector<f64>| {
        let inv = DMatrix::from_diagonal(&l.map(|v| 1.0 / v.sqrt()));
        linalg::symmetrize(&(e * inv * e.transpose()))
    };
    let r1 = whiten(&e1, &l1);
    let r2 = whiten(&e2, &l2);
    let c = &r1 * pair.block(Block::Cross) * &r2;

    let triplets = sorted_singular_triplets(&c, tol.zero_tol)?;
    let p11 = triplets.iter().take_while(|t| t.0 >= 1.0 - tol.one_tol).count();
    let k = triplets.len();

    let mut u_sig = DMatrix::zeros(p1, k);
    let mut v_sig = DMatrix::zeros(p2, k);
    for (j, (_, u, v)) in triplets.iter().enumerate() {
        u_sig.set_column(j, u);
        v_sig.set_column(j, v);
    }
    let s1 = assemble_transform(&e1, &null1, &u_sig, &r1);
    let s2 = assemble_transform(&e2, &null2, &v_sig, &r2);
    let d: Vec<f64> = triplets[p11..].iter().map(|t| t.0).collect();
    let n = d.len();

    Ok(CanonicalDecomposition {
        s1,
        s2,
        d,
        p11,
        p12: n,
        p13: p1 - p11 - n,
        p21: p11,
        p22: n,
        p23: p2 - p11 - n,
        rank1: e1.ncols(),
        rank2: e2.ncols(),
    })
}

type Triplet = (f64, DVector<f64>, DVector<f64>);

/// Singular triplets with `σ > zero_tol`, decreasing, ties by original index,
/// left vectors sign-fixed (right vectors follow).
fn sorted_singular_triplets(c: &DMatrix<f64>, zero_tol: f64) -> Result<Vec<Triplet>> {
    let (m, n) = c.shape();
    if m == 0 || n == 0 || linalg::max_abs(c) == 0.0 {
        return Ok(Vec::new());
    }
    let (u, sv, v) = linalg::svd(c).ok_or(Error::DegenerateSvd)?;
    if sv.iter().any(|s| !s.is_finite()) {
        return Err(Error::DegenerateSvd);
    }
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let mut out = Vec::new();
    for idx in order {
        if sv[idx] <= zero_tol {
            continue;
        }
        let mut left: Vec<f64> = u.column(idx).iter().copied().collect();
        let mut right: Vec<f64> = v.column(idx).iter().copied().collect();
        if linalg::sign_fix(&mut left) {
            right.iter_mut().for_each(|x| *x = -*x);
        }
        out.push((sv[idx], DVector::from_vec(left), DVector::from_vec(right)));
    }
    Ok(out)
}

/// Rows: whitened singular directions, whitened completion of the range, raw null directions.
fn assemble_transform(
    range: &DMatrix<f64>,
    null: &DMatrix<f64>,
    sig: &DMatrix<f64>,
    whitener: &DMatrix<f64>,
) -> DMatrix<f64> {
    let p = whitener.nrows();
    let r = range.ncols();
    // completion computed in range coordinates so it stays inside the range
    let coords = range.transpose() * sig;
    let completion = range * linalg::orthogonal_complement(&coords, r);

    let mut s = DMatrix::zeros(p, p);
    let mut row = 0;
    for dir in sig.column_iter().chain(completion.column_iter()) {
        let w = dir.transpose() * whitener;
        s.set_row(row, &w);
        row += 1;
    }
    debug_assert_eq!(row, r);
    for dir in null.column_iter() {
        s.set_row(row, &dir.transpose());
        row += 1;
    }
    s
}

/// `blkdiag(S1, S2) · Q · blkdiag(S1, S2)ᵀ`.
pub fn apply_transformation(
    pair: &JointGaussianPair,
    s1: &DMatrix<f64>,
    s2: &DMatrix<f64>,
    tol: &NumericTolerances,
) -> Result<JointGaussianPair> {
    let (p1, p2) = (pair.p1(), pair.p2());
    if s1.shape() != (p1, p1) || s2.shape() != (p2, p2) {
        return Err(Error::DimensionMismatch {
            expected: format!("S1 {p1}x{p1}, S2 {p2}x{p2}"),
            found: format!("S1 {:?}, S2 {:?}", s1.shape(), s2.shape()),
        });
    }
    let s = linalg::block_diag(s1, s2);
    let condition = linalg::condition_number(s1).max(linalg::condition_number(s2));
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularTransformation { condition });
    }
    let q = linalg::symmetrize(&(&s * pair.covariance() * s.transpose()));
    crate::model::validate_joint_covariance(&q, p1, p2, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalReport {
    pub x1_deviation: f64,
    pub x2_deviation: f64,
    pub cross_deviation: f64,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Compare the transformed covariance with the canonical template block by block.
pub fn verify_canonical_form(decomp: &CanonicalDecomposition, pair: &JointGaussianPair) -> CanonicalReport {
    let (p1, p2) = (pair.p1(), pair.p2());
    if decomp.s1.shape() != (p1, p1) || decomp.s2.shape() != (p2, p2) {
        return CanonicalReport {
            x1_deviation: f64::INFINITY,
            x2_deviation: f64::INFINITY,
            cross_deviation: f64::INFINITY,
            max_deviation: f64::INFINITY,
            passed: false,
        };
    }
    let s = linalg::block_diag(&decomp.s1, &decomp.s2);
    let t = &s * pair.covariance() * s.transpose();
    let template = decomp.template();
    let dev = |r0: usize, c0: usize, r: usize, c: usize| {
        linalg::max_abs_diff(
            &t.view((r0, c0), (r, c)).into_owned(),
            &template.view((r0, c0), (r, c)).into_owned(),
        )
    };
    let x1 = dev(0, 0, p1, p1);
    let x2 = dev(p1, p1, p2, p2);
    let cross = dev(0, p1, p1, p2).max(dev(p1, 0, p2, p1));
    let max = x1.max(x2).max(cross);
    CanonicalReport {
        x1_deviation: x1,
        x2_deviation: x2,
        cross_deviation: cross,
        max_deviation: max,
        passed: max <= CANONICAL_TOL,
    }
}

/// Singular values of the whitened cross-covariance, all of them, nonincreasing.
pub fn normalized_cross_singular_values(pair: &JointGaussianPair, tol: &NumericTolerances) -> Vec<f64> {
    let r1 = linalg::psd_inv_sqrt(&pair.block(Block::X1), tol.rank_tol);
    let r2 = linalg::psd_inv_sqrt(&pair.block(Block::X2), tol.rank_tol);
    let c = r1 * pair.block(Block::Cross) * r2;
    match linalg::svd(&c) {
        Some((_, sv, _)) => sv.iter().copied().collect(),
        None => vec![f64::NAN; c.nrows().min(c.ncols())],
    }
}
