//! Mutual information, the `Q_W`-parametrized bound on `I(X1, X2; W)`, and
//! Wyner's common information for canonical Gaussian pairs. All rates in nats.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::canonical::CanonicalDecomposition;
use crate::error::{Error, Result};
use crate::linalg;
use crate::optimize::golden_section;
use crate::realization::{check_correlations, diagonal_qw, random_feasible_qw, validate_qw, QwParameter};

/// A nonnegative rate in nats, or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedRate {
    Finite(f64),
    Infinite,
}

impl ExtendedRate {
    pub fn from_f64(v: f64) -> Self {
        if v.is_infinite() && v > 0.0 {
            ExtendedRate::Infinite
        } else {
            ExtendedRate::Finite(v.max(0.0))
        }
    }

    /// Value as `f64`, `+inf` for the infinite case.
    pub fn value(self) -> f64 {
        match self {
            ExtendedRate::Finite(v) => v,
            ExtendedRate::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedRate::Infinite)
    }

    pub fn in_unit(self, unit: Unit) -> f64 {
        unit.from_nats(self.value())
    }
}

impl fmt::Display for ExtendedRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRate::Finite(v) => write!(f, "{v}"),
            ExtendedRate::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedRate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::io::extended_f64::serialize(&self.value(), s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Nats,
    Bits,
}

impl Unit {
    pub fn from_nats(self, v: f64) -> f64 {
        match self {
            Unit::Nats => v,
            Unit::Bits => v / std::f64::consts::LN_2,
        }
    }
}

/// `I(X1; X2)`: zero with no correlated part, `-½ Σ ln(1 - d_i²)` otherwise,
/// infinite when an identical part exists.
pub fn mutual_information(decomp: &CanonicalDecomposition) -> ExtendedRate {
    if decomp.has_identical_part() {
        return ExtendedRate::Infinite;
    }
    ExtendedRate::from_f64(mutual_information_from_correlations(&decomp.d))
}

pub fn mutual_information_from_correlations(d: &[f64]) -> f64 {
    d.iter().map(|di| -0.5 * (-di * di).ln_1p()).sum()
}

/// `½ Σ ln((1 + d_i) / (1 - d_i))`.
pub fn common_information_from_correlations(d: &[f64]) -> f64 {
    d.iter().map(|di| 0.5 * (di.ln_1p() - (-di).ln_1p())).sum()
}

/// Plug-in Gaussian mutual information `½ ln(det Σ11 det Σ22 / det Σ)` of a
/// covariance split after the first `p1` coordinates.
pub fn gaussian_mutual_information(cov: &DMatrix<f64>, p1: usize) -> f64 {
    let p = cov.nrows();
    let c11 = cov.view((0, 0), (p1, p1)).into_owned();
    let c22 = cov.view((p1, p1), (p - p1, p - p1)).into_owned();
    0.5 * (linalg::sym_logdet(&c11, 0.0) + linalg::sym_logdet(&c22, 0.0) - linalg::sym_logdet(cov, 0.0))
}

/// Lower bound on `I(X1, X2; W)` for a feasible `Q_W`:
///
/// `½ Σ ln(1 - d_i²) - ½ ln det((I - D^{1/2} Q_W^{-1} D^{1/2})(I - D^{1/2} Q_W D^{1/2}))`.
///
/// Infinite on the boundary of the feasible set.
pub fn lower_bound_given_qw(d: &[f64], qw: &QwParameter) -> Result<ExtendedRate> {
    let qw = validate_qw(d, qw.matrix())?;
    if qw.is_boundary() {
        return Ok(ExtendedRate::Infinite);
    }
    let n = d.len();
    if n == 0 {
        return Ok(ExtendedRate::Finite(0.0));
    }
    let q = qw.matrix();
    let dh = DMatrix::from_diagonal(&DVector::from_iterator(n, d.iter().map(|v| v.sqrt())));
    let eye = DMatrix::<f64>::identity(n, n);
    let q_inv = q.clone().cholesky().ok_or(Error::SingularQw)?.inverse();
    let a = &eye - &dh * q_inv * &dh;
    let b = &eye - &dh * q * &dh;
    let ld = linalg::sym_logdet(&a, 0.0) + linalg::sym_logdet(&b, 0.0);
    if ld == f64::NEG_INFINITY {
        return Ok(ExtendedRate::Infinite);
    }
    let base: f64 = d.iter().map(|di| 0.5 * (-di * di).ln_1p()).sum();
    Ok(ExtendedRate::from_f64(base - 0.5 * ld))
}

/// Excess of the per-coordinate bound over its value at `q = 1`:
/// `-½ ln(1 - d (q-1)² / (q (1-d)²))`. Written this way so the minimizer is
/// resolved well below the square root of machine precision.
pub fn coordinate_excess(d: f64, q: f64) -> f64 {
    let t = d * (q - 1.0) * (q - 1.0) / (q * (1.0 - d) * (1.0 - d));
    if t >= 1.0 {
        return f64::INFINITY;
    }
    -0.5 * (-t).ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchMode {
    /// Per-coordinate golden-section search over diagonal `Q_W`.
    Diagonal,
    /// Random feasible full matrices plus projected local descent; a falsification oracle.
    Full { starts: usize, steps: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundMinimum {
    pub qw: QwParameter,
    pub value: ExtendedRate,
    /// Number of points at which the bound was evaluated.
    pub evaluations: usize,
}

pub fn minimize_lower_bound(d: &[f64], mode: SearchMode, opt_tol: f64) -> Result<LowerBoundMinimum> {
    check_correlations(d)?;
    match mode {
        SearchMode::Diagonal => {
            let mut evaluations = 0;
            let q: Vec<f64> = d
                .iter()
                .map(|&dj| {
                    let m = golden_section(|q| coordinate_excess(dj, q), dj + opt_tol, 1.0 / dj - opt_tol, opt_tol, 500);
                    evaluations += m.iterations + 3;
                    m.x
                })
                .collect();
            let qw = diagonal_qw(d, &q)?;
            let value = lower_bound_given_qw(d, &qw)?;
            Ok(LowerBoundMinimum { qw, value, evaluations })
        }
        SearchMode::Full { starts, steps, seed } => full_search(d, starts, steps, seed),
    }
}

/// Projected descent on `M` where `Q_W = D + G M G`, `G = (D^{-1} - D)^{1/2}`,
/// `0 <= M <= I`. Every iterate is feasible by construction.
fn full_search(d: &[f64], starts: usize, steps: usize, seed: u64) -> Result<LowerBoundMinimum> {
    let n = d.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dm = DMatrix::from_diagonal(&DVector::from_row_slice(d));
    let g = DMatrix::from_diagonal(&DVector::from_iterator(n, d.iter().map(|v| (1.0 / v - v).sqrt())));
    let g_inv = DMatrix::from_diagonal(&DVector::from_iterator(n, d.iter().map(|v| 1.0 / (1.0 / v - v).sqrt())));
    let clip = 1e-9;
    let project = |m: &DMatrix<f64>| linalg::spectral_map(m, |v| v.clamp(clip, 1.0 - clip));
    let to_q = |m: &DMatrix<f64>| linalg::symmetrize(&(&dm + &g * m * &g));
    let mut evaluations = 0usize;
    let mut eval = |m: &DMatrix<f64>| -> f64 {
        evaluations += 1;
        match validate_qw(d, &to_q(m)) {
            Ok(q) => lower_bound_given_qw(d, &q).map(|r| r.value()).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    };

    let mut best_m: Option<DMatrix<f64>> = None;
    let mut best = f64::INFINITY;
    for _ in 0..starts {
        let start = random_feasible_qw(d, 0.0, &mut rng)?;
        let mut m = linalg::symmetrize(&(&g_inv * (start.matrix() - &dm) * &g_inv));
        let mut fm = eval(&m);
        if fm < best {
            best = fm;
            best_m = Some(m.clone());
        }
        let mut step = 0.1;
        for _ in 0..steps {
            if !fm.is_finite() {
                m = project(&m);
                fm = eval(&m);
                continue;
            }
            let h = 1e-7;
            let mut grad = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let mut e = DMatrix::zeros(n, n);
                    e[(i, j)] = h;
                    e[(j, i)] = h;
                    let fp = eval(&(&m + &e));
                    let fmn = eval(&(&m - &e));
                    let gij = if fp.is_finite() && fmn.is_finite() { (fp - fmn) / (2.0 * h) } else { 0.0 };
                    grad[(i, j)] = gij;
                    grad[(j, i)] = gij;
                }
            }
            let gnorm = linalg::max_abs(&grad);
            if gnorm < 1e-12 {
                break;
            }
            let mut accepted = false;
            while step > 1e-12 {
                let cand = project(&(&m - &grad * (step / gnorm)));
                let fc = eval(&cand);
                if fc < fm {
                    m = cand;
                    fm = fc;
                    step *= 1.5;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if fm < best {
                best = fm;
                best_m = Some(m.clone());
            }
            if !accepted {
                break;
            }
        }
    }
    let qw = match best_m {
        Some(m) => validate_qw(d, &to_q(&m))?,
        None => QwParameter::identity(n),
    };
    Ok(LowerBoundMinimum {
        qw,
        value: ExtendedRate::from_f64(best),
        evaluations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommonInformation {
    pub value: ExtendedRate,
    /// The minimizing `Q_W`, always `I_n`.
    pub optimizer: QwParameter,
}

/// Wyner's common information `C_W = ½ Σ ln((1 + d_i)/(1 - d_i))`, zero when `n = 0`.
pub fn wyner_common_information(decomp: &CanonicalDecomposition) -> Result<CommonInformation> {
    if decomp.has_identical_part() {
        return Err(Error::IdenticalPartPresent { p11: decomp.p11 });
    }
    Ok(CommonInformation {
        value: ExtendedRate::Finite(common_information_from_correlations(&decomp.d)),
        optimizer: QwParameter::identity(decomp.n()),
    })
}
