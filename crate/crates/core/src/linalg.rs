//! Dense symmetric kernels shared by the rest of the crate.
//!
//! Everything here is deterministic: eigenpairs come back sorted with a stable
//! index tie-break and every eigenvector is sign-fixed so that its
//! largest-magnitude entry is positive.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Sorted symmetric eigendecomposition. `values[k]` pairs with column `k` of `vectors`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

/// `(M + Mᵀ) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    max_abs_diff(m, &m.transpose())
}

/// Flip `v` so its largest-magnitude entry (first one on ties) is positive.
pub(crate) fn sign_fix(v: &mut [f64]) -> bool {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
        true
    } else {
        false
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues in ascending order.
pub fn sym_eigen(m: &DMatrix<f64>) -> Eigen {
    let n = m.nrows();
    if n == 0 {
        return Eigen {
            values: DVector::zeros(0),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    let sym = to_faer(&symmetrize(m));
    let eig = match sym.self_adjoint_eigen(faer::Side::Lower) {
        Ok(e) => e,
        // only fails on non-finite input; report NaN eigenpairs rather than panic
        Err(_) => {
            return Eigen { values: DVector::from_element(n, f64::NAN), vectors: DMatrix::from_element(n, n, f64::NAN) };
        }
    };
    let raw_values = eig.S().column_vector();
    let raw_vectors = eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw_values[a].total_cmp(&raw_values[b]).then(a.cmp(&b)));
    let values = DVector::from_iterator(n, order.iter().map(|&k| raw_values[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: Vec<f64> = (0..n).map(|i| raw_vectors[(i, src)]).collect();
        sign_fix(&mut col);
        vectors.set_column(dst, &DVector::from_vec(col));
    }
    Eigen { values, vectors }
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Full SVD `m = U Diag(σ) Vᵀ`, singular values nonincreasing.
/// Returns `None` when the factorization does not converge.
pub fn svd(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    let (r, c) = m.shape();
    let f = to_faer(m).svd().ok()?;
    let k = r.min(c);
    let sigma = f.S().column_vector();
    let u = DMatrix::from_fn(r, r, |i, j| f.U()[(i, j)]);
    let v = DMatrix::from_fn(c, c, |i, j| f.V()[(i, j)]);
    Some((u, DVector::from_fn(k, |i, _| sigma[i]), v))
}

/// Smallest eigenvalue; `+inf` for an empty matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    sym_eigen(m).values[0]
}

/// `V f(Λ) Vᵀ` for a symmetric matrix.
pub fn spectral_map(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = sym_eigen(m);
    let mapped = DMatrix::from_diagonal(&eig.values.map(f));
    symmetrize(&(&eig.vectors * mapped * eig.vectors.transpose()))
}

/// Symmetric PSD square root; eigenvalues below `rank_tol * λ_max` are truncated to zero.
pub fn psd_sqrt(m: &DMatrix<f64>, rank_tol: f64) -> DMatrix<f64> {
    let cutoff = rank_cutoff(m, rank_tol);
    spectral_map(m, |v| if v > cutoff { v.sqrt() } else { 0.0 })
}

/// Symmetric inverse square root on the range of a PSD matrix (pseudo-inverse square root).
pub fn psd_inv_sqrt(m: &DMatrix<f64>, rank_tol: f64) -> DMatrix<f64> {
    let cutoff = rank_cutoff(m, rank_tol);
    spectral_map(m, |v| if v > cutoff { 1.0 / v.sqrt() } else { 0.0 })
}

fn rank_cutoff(m: &DMatrix<f64>, rank_tol: f64) -> f64 {
    let lmax = m.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if m.nrows() == 0 || lmax == 0.0 {
        return 0.0;
    }
    let eig = sym_eigen(m);
    let top = eig.values[eig.values.len() - 1].max(0.0);
    rank_tol * top
}

/// Split a PSD matrix into its range and null space.
/// Returns (range basis, range eigenvalues, null basis), each basis column-orthonormal.
pub fn range_split(m: &DMatrix<f64>, rank_tol: f64) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = sym_eigen(m);
    let top = if n == 0 { 0.0 } else { eig.values[n - 1].max(0.0) };
    let cutoff = rank_tol * top;
    // descending order for the range, ascending index order otherwise
    let mut range_idx: Vec<usize> = (0..n).filter(|&k| top > 0.0 && eig.values[k] > cutoff).collect();
    range_idx.reverse();
    let null_idx: Vec<usize> = (0..n).filter(|k| !range_idx.contains(k)).collect();
    let take = |idx: &[usize]| {
        let mut out = DMatrix::zeros(n, idx.len());
        for (dst, &src) in idx.iter().enumerate() {
            out.set_column(dst, &eig.vectors.column(src));
        }
        out
    };
    let values = DVector::from_iterator(range_idx.len(), range_idx.iter().map(|&k| eig.values[k]));
    (take(&range_idx), values, take(&null_idx))
}

pub fn rank(m: &DMatrix<f64>, rank_tol: f64) -> usize {
    range_split(m, rank_tol).1.len()
}

/// Orthonormal basis of the orthogonal complement of the columns of `basis`
/// (assumed orthonormal) inside `R^dim`.
pub fn orthogonal_complement(basis: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let k = basis.ncols();
    if k >= dim {
        return DMatrix::zeros(dim, 0);
    }
    let projector = DMatrix::identity(dim, dim) - basis * basis.transpose();
    let eig = sym_eigen(&projector);
    // eigenvalues are ~0 (k of them) then ~1 (dim - k of them)
    let mut out = DMatrix::zeros(dim, dim - k);
    for j in 0..dim - k {
        out.set_column(j, &eig.vectors.column(k + j));
    }
    out
}

/// Natural log of the determinant of a symmetric positive definite matrix.
/// Returns `-inf` if any eigenvalue is `<= floor`.
pub fn sym_logdet(m: &DMatrix<f64>, floor: f64) -> f64 {
    let eig = sym_eigen(m);
    let mut acc = 0.0;
    for v in eig.values.iter() {
        if *v <= floor {
            return f64::NEG_INFINITY;
        }
        acc += v.ln();
    }
    acc
}

/// Ratio of the extreme singular values; infinite when the matrix is singular.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericalBreakdown("matrix inversion failed".into()))
}

/// Block-diagonal matrix `diag(a, b)`.
pub fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

pub fn is_diagonal(m: &DMatrix<f64>, tol: f64) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)].abs() <= tol))
}

/// Covariance `XᵀX / N` of zero-mean rows.
pub fn second_moment(samples: &DMatrix<f64>) -> DMatrix<f64> {
    let n = samples.nrows();
    if n == 0 {
        return DMatrix::zeros(samples.ncols(), samples.ncols());
    }
    samples.tr_mul(samples) / n as f64
}

/// Unbiased sample covariance with mean subtraction.
pub fn sample_covariance(samples: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = samples.shape();
    if n < 2 {
        return DMatrix::zeros(p, p);
    }
    let mean = samples.row_mean();
    let mut centered = samples.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    symmetrize(&(centered.tr_mul(&centered) / (n - 1) as f64))
}
