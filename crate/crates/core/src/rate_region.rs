//! Gray-Wyner rate points for the correlated part of a canonical Gaussian pair.
//!
//! Given `Q_W`, the common message carries `R0 = I(X1, X2; W)` and the private
//! messages carry the conditional rate-distortion functions of `X12` and `X22`
//! given `W`. Conditionally on `W` the sources are independent Gaussian
//! vectors with covariances `Cov(Z1)` and `Cov(Z2)` of the realization, so
//! each conditional RDF is a reverse water-filling over their eigenvalues.
//! For diagonal `Q_W = Diag(q)` these are `1 - d_j / q_j` for `X12` and
//! `1 - d_j q_j` for `X22`.

use serde::Serialize;

use crate::canonical::CanonicalDecomposition;
use crate::error::{Error, FeasibleSide, Result};
use crate::information::{common_information_from_correlations, coordinate_excess, lower_bound_given_qw, ExtendedRate};
use crate::io::extended_f64;
use crate::linalg;
use crate::optimize::{golden_section, scan_then_golden};
use crate::realization::{assemble_joint_covariance, check_correlations, diagonal_qw, validate_qw, QwParameter, FEASIBILITY_TOL};

/// Water-level convergence on the distortion sum.
pub const WATER_TOL: f64 = 1e-14;
/// A point is on the Pangloss plane when its sum rate is within this of the joint RDF.
pub const PLANE_TOL: f64 = 1e-6;
/// Slack allowed on the Pangloss and marginal bounds.
pub const BOUND_TOL: f64 = 1e-8;
/// Allowed disagreement between the analytic and grid joint RDF.
pub const ORACLE_TOL: f64 = 1e-4;
/// Boundary tolerance on `Δ_i <= Σ (1 - d_j)`.
pub const REGION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistortionPair {
    #[serde(with = "extended_f64")]
    pub delta1: f64,
    #[serde(with = "extended_f64")]
    pub delta2: f64,
}

impl DistortionPair {
    pub fn new(delta1: f64, delta2: f64) -> Result<Self> {
        for v in [delta1, delta2] {
            if v.is_nan() || v < 0.0 {
                return Err(Error::InvalidInput(format!("distortion must be nonnegative, got {v}")));
            }
        }
        Ok(Self { delta1, delta2 })
    }

    fn require_positive(&self) -> Result<()> {
        for v in [self.delta1, self.delta2] {
            if !(v > 0.0) {
                return Err(Error::NonpositiveDistortion(v));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaterFillingAllocation {
    /// Per-component distortions `min(λ, σ²_j)`.
    pub allocation: Vec<f64>,
    /// Water level `λ`.
    pub level: f64,
    /// Component variances `σ²_j`.
    pub levels: Vec<f64>,
}

impl WaterFillingAllocation {
    pub fn total(&self) -> f64 {
        self.allocation.iter().sum()
    }

    /// `½ Σ ln⁺(σ²_j / Δ_j)`.
    pub fn rate(&self) -> f64 {
        rate_of_allocation(&self.levels, &self.allocation)
    }
}

fn ln_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

fn rate_of_allocation(levels: &[f64], allocation: &[f64]) -> f64 {
    levels
        .iter()
        .zip(allocation)
        .map(|(&l, &a)| {
            if l <= 0.0 {
                0.0
            } else if a <= 0.0 {
                f64::INFINITY
            } else {
                0.5 * ln_plus(l / a)
            }
        })
        .sum()
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.iter().any(|l| l.is_nan() || *l < 0.0 || l.is_infinite()) {
        return Err(Error::InvalidInput(format!("water-filling levels must be finite and nonnegative: {levels:?}")));
    }
    Ok(())
}

/// Reverse water-filling: find `λ` with `Σ min(λ, σ²_j) = min(Δ, Σ σ²_j)` by bisection.
pub fn water_filling(levels: &[f64], delta: f64, tol: f64) -> Result<WaterFillingAllocation> {
    check_levels(levels)?;
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidInput(format!("distortion must be nonnegative, got {delta}")));
    }
    let total: f64 = levels.iter().sum();
    let top = levels.iter().cloned().fold(0.0_f64, f64::max);
    let fill = |lambda: f64| -> Vec<f64> { levels.iter().map(|&l| l.min(lambda)).collect() };
    if delta >= total {
        return Ok(WaterFillingAllocation { allocation: levels.to_vec(), level: top, levels: levels.to_vec() });
    }
    if delta == 0.0 {
        return Ok(WaterFillingAllocation { allocation: vec![0.0; levels.len()], level: 0.0, levels: levels.to_vec() });
    }
    let (mut lo, mut hi) = (0.0, top);
    let mut level = 0.5 * (lo + hi);
    for _ in 0..200 {
        level = 0.5 * (lo + hi);
        let excess: f64 = levels.iter().map(|&l| l.min(level)).sum::<f64>() - delta;
        if excess.abs() <= tol || level <= lo || level >= hi {
            break;
        }
        if excess < 0.0 {
            lo = level;
        } else {
            hi = level;
        }
    }
    Ok(WaterFillingAllocation { allocation: fill(level), level, levels: levels.to_vec() })
}

/// RDF of independent Gaussian components with variances `levels` under total distortion `Δ`.
pub fn reverse_water_filling_rate(levels: &[f64], delta: f64) -> Result<f64> {
    if delta.is_infinite() && delta > 0.0 {
        check_levels(levels)?;
        return Ok(0.0);
    }
    Ok(water_filling(levels, delta, WATER_TOL)?.rate())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    X1,
    X2,
}

/// Conditional variances of the correlated components given `W = Diag(q)`:
/// `1 - d_j / q_j` for `X12`, `1 - d_j q_j` for `X22`.
pub fn conditional_levels(d: &[f64], q: &[f64], side: Side) -> Result<Vec<f64>> {
    check_correlations(d)?;
    if q.len() != d.len() {
        return Err(Error::DimensionMismatch { expected: format!("{} entries", d.len()), found: q.len().to_string() });
    }
    for (&dj, &qj) in d.iter().zip(q) {
        if qj - dj < -FEASIBILITY_TOL {
            return Err(Error::InfeasibleQw { side: FeasibleSide::Lower, eigenvalue: qj - dj });
        }
        if 1.0 / dj - qj < -FEASIBILITY_TOL {
            return Err(Error::InfeasibleQw { side: FeasibleSide::Upper, eigenvalue: 1.0 / dj - qj });
        }
    }
    Ok(d.iter()
        .zip(q)
        .map(|(&dj, &qj)| match side {
            Side::X1 => (1.0 - dj / qj).max(0.0),
            Side::X2 => (1.0 - dj * qj).max(0.0),
        })
        .collect())
}

/// `R_{X12|W}(Δ)` for diagonal `Q_W = Diag(q)`: `½ Σ ln⁺((1 - d_j/q_j) / Δ_j)`
/// with water-filling `Δ_j`.
pub fn conditional_rdf(d: &[f64], q: &[f64], delta: f64) -> Result<f64> {
    conditional_rdf_side(d, q, delta, Side::X1)
}

pub fn conditional_rdf_side(d: &[f64], q: &[f64], delta: f64, side: Side) -> Result<f64> {
    reverse_water_filling_rate(&conditional_levels(d, q, side)?, delta)
}

/// RDF of a `dimension`-dimensional unit-variance Gaussian vector: `(p/2) ln(p/Δ)` below `p`, else 0.
pub fn marginal_rdf(dimension: usize, delta: f64) -> Result<f64> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::NonpositiveDistortion(delta));
    }
    let p = dimension as f64;
    if dimension == 0 || delta >= p {
        return Ok(0.0);
    }
    Ok(0.5 * p * (p / delta).ln())
}

/// RDF of a unit-variance scalar pair with correlation `rho` under separate
/// mean-square distortions `(a, b)`.
///
/// Three regimes: one reconstruction comes for free from the other
/// (`½ ln(1/min)`); both distortions small (`½ ln((1-ρ²)/(ab))`); and the
/// intermediate regime with the correction term `(ρ - √((1-a)(1-b)))²`.
pub fn bivariate_joint_rdf(rho: f64, a: f64, b: f64) -> f64 {
    let rho = rho.abs();
    let (a, b) = (a.min(1.0), b.min(1.0));
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if lo <= 0.0 {
        return f64::INFINITY;
    }
    let r2 = rho * rho;
    if hi >= 1.0 - r2 * (1.0 - lo) {
        return 0.5 * ln_plus(1.0 / lo);
    }
    let prod = (1.0 - a) * (1.0 - b);
    if prod >= r2 {
        return 0.5 * ((1.0 - r2) / (a * b)).ln();
    }
    let gap = rho - prod.sqrt();
    0.5 * ((1.0 - r2) / (a * b - gap * gap)).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointRdf {
    #[serde(with = "extended_f64")]
    pub rate: f64,
    /// The Shannon lower bound is attained, so `rate` is the closed form
    /// `½ Σ ln((1 - d_j²) / (δ1 δ2))` plus the private terms.
    pub closed_form: bool,
    /// Value from the grid search, when one was run.
    pub grid_rate: Option<f64>,
    /// `rate` comes from the numerical allocation search rather than the closed form.
    pub reduced_confidence: bool,
}

/// Water level by sorting: exact solution of `Σ min(λ, ℓ_j) = Δ` for `Δ <= Σ ℓ_j`.
#[cfg(test)]
fn water_level_by_sorting(levels: &[f64], delta: f64) -> f64 {
    let mut sorted = levels.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut used = 0.0;
    let m = sorted.len();
    for (k, &l) in sorted.iter().enumerate() {
        let remaining = (m - k) as f64;
        if used + l * remaining >= delta {
            return (delta - used) / remaining;
        }
        used += l;
    }
    sorted.last().copied().unwrap_or(0.0)
}

const MAX_GRID_DIMS: usize = 4;

/// Joint RDF `R_{X1,X2}(Δ1, Δ2)` of the canonical source: `n` independent
/// correlated pairs plus `private.0` / `private.1` unit-variance private
/// components.
///
/// The rate is the minimum over per-component distortion allocations of the
/// sum of the exact per-pair RDFs and the private-block RDFs. Each pair RDF is
/// bounded below by `½ ln((1 - d²)/(ab))`, whose minimum is the equal split;
/// when the equal split lands where that bound is tight the closed form is
/// returned. Otherwise the convex allocation problem is solved by alternating
/// Lagrangian sweeps and the result is flagged `reduced_confidence`.
///
/// `grid_resolution` additionally runs a zoomed grid search over allocations
/// and errors with [`Error::OracleDisagreement`] past `1e-4`.
pub fn joint_rdf_oracle(d: &[f64], private: (usize, usize), delta: DistortionPair, grid_resolution: Option<usize>) -> Result<JointRdf> {
    check_correlations(d)?;
    delta.require_positive()?;
    let n = d.len();
    let (m1, m2) = private;
    let a1 = delta.delta1 / (n + m1).max(1) as f64;
    let a2 = delta.delta2 / (n + m2).max(1) as f64;
    let certified = a1 <= 1.0 && a2 <= 1.0 && d.iter().all(|&dj| (1.0 - a1) * (1.0 - a2) >= dj * dj);

    let (rate, closed_form) = if certified {
        let pairs: f64 = d.iter().map(|&dj| 0.5 * ((1.0 - dj * dj) / (a1 * a2)).ln()).sum();
        (pairs - 0.5 * m1 as f64 * a1.ln() - 0.5 * m2 as f64 * a2.ln(), true)
    } else {
        (allocation_search(d, private, delta), false)
    };

    let grid_rate = match grid_resolution {
        Some(res) => Some(grid_joint_rdf(d, private, delta, res)?),
        None => None,
    };
    if let Some(g) = grid_rate {
        if (rate - g).abs() > ORACLE_TOL {
            return Err(Error::OracleDisagreement { analytic: rate, grid: g });
        }
    }
    Ok(JointRdf { rate, closed_form, grid_rate, reduced_confidence: !closed_form })
}

/// Per-component RDF as a function of its own distortion with the partner's fixed.
/// Component `j < n` is a correlated pair, `j == n` the private block of size `m`.
struct Components<'a> {
    d: &'a [f64],
    private: usize,
}

impl Components<'_> {
    fn len(&self) -> usize {
        self.d.len() + usize::from(self.private > 0)
    }

    fn cap(&self, j: usize) -> f64 {
        if j < self.d.len() {
            1.0
        } else {
            self.private as f64
        }
    }

    fn rate(&self, j: usize, own: f64, partner: f64) -> f64 {
        if j < self.d.len() {
            bivariate_joint_rdf(self.d[j], own, partner)
        } else {
            marginal_rdf(self.private, own).unwrap_or(f64::INFINITY)
        }
    }
}

/// Minimizes `Σ_j f_j(x_j)` subject to `Σ x_j = budget`, `0 < x_j <= cap_j`,
/// for convex nonincreasing `f_j`, by bisection on the multiplier.
fn lagrangian_split(comp: &Components, partner: &[f64], budget: f64) -> Vec<f64> {
    let k = comp.len();
    let caps: Vec<f64> = (0..k).map(|j| comp.cap(j)).collect();
    if budget >= caps.iter().sum::<f64>() {
        return caps;
    }
    let argmin = |mu: f64| -> Vec<f64> {
        (0..k)
            .map(|j| {
                let p = partner.get(j).copied().unwrap_or(0.0);
                golden_section(|x| comp.rate(j, x, p) + mu * x, 0.0, caps[j], 1e-15, 300).x
            })
            .collect()
    };
    // the total allocation is nonincreasing in mu; bisect on ln mu
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    let mut x = argmin(hi.exp());
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        let cand = argmin(mid.exp());
        let total: f64 = cand.iter().sum();
        if total > budget {
            lo = mid;
        } else {
            hi = mid;
            x = cand;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    // hand the leftover budget to components below their cap, which only lowers the rate
    let mut spare = budget - x.iter().sum::<f64>();
    for j in 0..k {
        if spare <= 0.0 {
            break;
        }
        let room = (caps[j] - x[j]).min(spare);
        x[j] += room;
        spare -= room;
    }
    x
}

fn allocation_search(d: &[f64], private: (usize, usize), delta: DistortionPair) -> f64 {
    let n = d.len();
    let c1 = Components { d, private: private.0 };
    let c2 = Components { d, private: private.1 };
    let total = |x1: &[f64], x2: &[f64]| -> f64 {
        let mut sum = 0.0;
        for j in 0..c1.len() {
            sum += c1.rate(j, x1[j], x2.get(j).copied().unwrap_or(0.0));
        }
        for j in n..c2.len() {
            sum += c2.rate(j, x2[j], 0.0);
        }
        sum
    };
    let equal = |c: &Components, budget: f64| -> Vec<f64> {
        let w = budget / (n + c.private).max(1) as f64;
        (0..c.len()).map(|j| (w * if j < n { 1.0 } else { c.private as f64 }).min(c.cap(j))).collect()
    };
    let mut x1 = equal(&c1, delta.delta1);
    let mut x2 = equal(&c2, delta.delta2);
    let mut value = total(&x1, &x2);
    for _ in 0..400 {
        x1 = lagrangian_split(&c1, &x2, delta.delta1);
        x2 = lagrangian_split(&c2, &x1, delta.delta2);
        let next = total(&x1, &x2);
        let improved = value - next;
        value = value.min(next);
        if improved.abs() < 1e-14 {
            break;
        }
    }
    value
}

/// Zoomed grid search over per-component distortion allocations.
fn grid_joint_rdf(d: &[f64], private: (usize, usize), delta: DistortionPair, resolution: usize) -> Result<f64> {
    let n = d.len();
    let (m1, m2) = private;
    let k1 = n + usize::from(m1 > 0);
    let k2 = n + usize::from(m2 > 0);
    if k1 == 0 && k2 == 0 {
        return Ok(0.0);
    }
    // distortion past the total variance buys nothing
    let budget1 = delta.delta1.min((n + m1) as f64);
    let budget2 = delta.delta2.min((n + m2) as f64);
    let f1 = k1.saturating_sub(1);
    let f2 = k2.saturating_sub(1);
    let dims = f1 + f2;
    if dims > MAX_GRID_DIMS {
        return Err(Error::InvalidInput(format!(
            "grid search supports at most {MAX_GRID_DIMS} free allocation coordinates, need {dims}"
        )));
    }

    let objective = |x: &[f64]| -> f64 {
        let split = |free: &[f64], k: usize, budget: f64| -> Option<Vec<f64>> {
            if k == 0 {
                return Some(Vec::new());
            }
            let used: f64 = free.iter().sum();
            let last = budget - used;
            if last < -1e-15 * budget.max(1.0) {
                return None;
            }
            let mut v = free.to_vec();
            v.push(last.max(0.0));
            Some(v)
        };
        let (Some(a1), Some(a2)) = (split(&x[..f1], k1, budget1), split(&x[f1..], k2, budget2)) else {
            return f64::INFINITY;
        };
        let mut total = 0.0;
        for j in 0..n {
            total += bivariate_joint_rdf(d[j], a1[j], a2[j]);
        }
        if m1 > 0 {
            total += marginal_rdf(m1, a1[n]).unwrap_or(f64::INFINITY);
        }
        if m2 > 0 {
            total += marginal_rdf(m2, a2[n]).unwrap_or(f64::INFINITY);
        }
        total
    };

    if dims == 0 {
        return Ok(objective(&[]));
    }
    let res = resolution.max(5);
    let mut lo: Vec<f64> = vec![0.0; dims];
    let mut hi: Vec<f64> = (0..dims).map(|i| if i < f1 { budget1 } else { budget2 }).collect();
    let caps = hi.clone();
    let mut best = f64::INFINITY;
    let mut best_x = vec![0.0; dims];
    let mut x = vec![0.0; dims];
    for _level in 0..80 {
        let steps: Vec<f64> = (0..dims).map(|i| (hi[i] - lo[i]) / (res - 1) as f64).collect();
        let total_points = res.pow(dims as u32);
        for idx in 0..total_points {
            let mut rem = idx;
            for i in 0..dims {
                x[i] = lo[i] + steps[i] * (rem % res) as f64;
                rem /= res;
            }
            let v = objective(&x);
            if v < best {
                best = v;
                best_x.copy_from_slice(&x);
            }
        }
        let width = steps.iter().cloned().fold(0.0_f64, f64::max);
        if width < 1e-13 {
            break;
        }
        for i in 0..dims {
            lo[i] = (best_x[i] - 3.0 * steps[i]).max(0.0);
            hi[i] = (best_x[i] + 3.0 * steps[i]).min(caps[i]);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRegionPoint {
    #[serde(rename = "R0", with = "extended_f64")]
    pub r0: f64,
    #[serde(rename = "R1", with = "extended_f64")]
    pub r1: f64,
    #[serde(rename = "R2", with = "extended_f64")]
    pub r2: f64,
    #[serde(with = "extended_f64")]
    pub sum_rate: f64,
    pub distortions: DistortionPair,
    #[serde(rename = "Qw")]
    pub qw: Vec<Vec<f64>>,
    #[serde(with = "extended_f64")]
    pub joint_rdf: f64,
    /// `R0 + R1 + R2 - R_{X1,X2}(Δ1, Δ2)`.
    #[serde(with = "extended_f64")]
    pub pangloss_gap: f64,
    pub on_pangloss_plane: bool,
    pub in_d_w: bool,
    /// `Q_W` was not diagonal; the point is outside the certified case.
    pub general_qw: bool,
}

/// One Gray-Wyner triple `(I(X1,X2;W), R_{X1|W}(Δ1), R_{X2|W}(Δ2))` for the given `Q_W`.
pub fn gray_wyner_triple(
    decomp: &CanonicalDecomposition,
    qw: &QwParameter,
    delta: DistortionPair,
    grid_resolution: Option<usize>,
) -> Result<RateRegionPoint> {
    if decomp.has_identical_part() {
        return Err(Error::IdenticalPartPresent { p11: decomp.p11 });
    }
    delta.require_positive()?;
    let d = &decomp.d;
    let qw = validate_qw(d, qw.matrix())?;
    let general = !qw.is_diagonal();
    let r0 = lower_bound_given_qw(d, &qw)?.value();
    let (levels1, levels2) = if general {
        let real = assemble_joint_covariance(d, &qw)?;
        let eig = |m: &nalgebra::DMatrix<f64>| -> Vec<f64> { linalg::sym_eigen(m).values.iter().map(|v| v.max(0.0)).collect() };
        (eig(&real.cov_z1), eig(&real.cov_z2))
    } else {
        let q = qw.diagonal();
        (conditional_levels(d, &q, Side::X1)?, conditional_levels(d, &q, Side::X2)?)
    };
    let r1 = reverse_water_filling_rate(&levels1, delta.delta1)?;
    let r2 = reverse_water_filling_rate(&levels2, delta.delta2)?;
    let joint = joint_rdf_oracle(d, (0, 0), delta, grid_resolution)?.rate;
    let sum_rate = r0 + r1 + r2;
    let gap = sum_rate - joint;
    let region = wyner_lossy_ci(decomp, delta)?;
    Ok(RateRegionPoint {
        r0,
        r1,
        r2,
        sum_rate,
        distortions: delta,
        qw: crate::io::matrix_to_rows(qw.matrix()),
        joint_rdf: joint,
        pangloss_gap: gap,
        on_pangloss_plane: gap.abs() <= PLANE_TOL,
        in_d_w: region.in_d_w,
        general_qw: general,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOptimum {
    pub value: f64,
    pub qw: QwParameter,
}

fn check_weights(alpha1: f64, alpha2: f64) -> Result<()> {
    let ok = (0.0..=1.0).contains(&alpha1) && (0.0..=1.0).contains(&alpha2) && alpha1 + alpha2 >= 1.0;
    if ok {
        Ok(())
    } else {
        Err(Error::WeightsOutOfRange { alpha1, alpha2 })
    }
}

/// `I(X1,X2;W) + α1 R_{X1|W}(Δ1) + α2 R_{X2|W}(Δ2)` at diagonal `Q_W = Diag(q)`.
pub fn weighted_objective(d: &[f64], q: &[f64], delta: DistortionPair, alpha1: f64, alpha2: f64) -> Result<f64> {
    let l1 = conditional_levels(d, q, Side::X1)?;
    let l2 = conditional_levels(d, q, Side::X2)?;
    let r0: f64 = common_information_from_correlations(d) + d.iter().zip(q).map(|(&dj, &qj)| coordinate_excess(dj, qj)).sum::<f64>();
    let mut total = r0;
    if alpha1 > 0.0 {
        total += alpha1 * reverse_water_filling_rate(&l1, delta.delta1)?;
    }
    if alpha2 > 0.0 {
        total += alpha2 * reverse_water_filling_rate(&l2, delta.delta2)?;
    }
    Ok(total)
}

/// `T(α1, α2)`: infimum of [`weighted_objective`] over diagonal feasible `Q_W`,
/// by coordinate descent with a scan-bracketed golden-section search per coordinate
/// (in `ln q`).
pub fn weighted_functional(
    decomp: &CanonicalDecomposition,
    delta: DistortionPair,
    alpha1: f64,
    alpha2: f64,
    opt_tol: f64,
) -> Result<WeightedOptimum> {
    check_weights(alpha1, alpha2)?;
    if decomp.has_identical_part() {
        return Err(Error::IdenticalPartPresent { p11: decomp.p11 });
    }
    let d = decomp.d.clone();
    let n = d.len();
    let mut q = vec![1.0; n];
    let mut value = weighted_objective(&d, &q, delta, alpha1, alpha2)?;
    for _sweep in 0..100 {
        let mut moved = 0.0_f64;
        for j in 0..n {
            let span = -d[j].ln();
            let edge = opt_tol.max(1e-12);
            let mut trial = q.clone();
            let m = scan_then_golden(
                |t| {
                    trial[j] = t.exp();
                    weighted_objective(&d, &trial, delta, alpha1, alpha2).unwrap_or(f64::INFINITY)
                },
                -span + edge,
                span - edge,
                41,
                opt_tol,
            );
            if m.value < value {
                moved = moved.max((m.x - q[j].ln()).abs());
                q[j] = m.x.exp();
                value = m.value;
            }
        }
        if moved <= opt_tol {
            break;
        }
    }
    Ok(WeightedOptimum { value, qw: diagonal_qw(&d, &q)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossyCommonInformation {
    /// `C_W` when `(Δ1, Δ2)` lies in the validity region, otherwise no claim.
    pub rate: Option<ExtendedRate>,
    pub in_d_w: bool,
}

/// Wyner's lossy common information: equals `C_W` whenever both `Δ_i <= Σ (1 - d_j)`.
pub fn wyner_lossy_ci(decomp: &CanonicalDecomposition, delta: DistortionPair) -> Result<LossyCommonInformation> {
    if decomp.has_identical_part() {
        return Err(Error::IdenticalPartPresent { p11: decomp.p11 });
    }
    let d = &decomp.d;
    if d.is_empty() {
        return Ok(LossyCommonInformation { rate: Some(ExtendedRate::Finite(0.0)), in_d_w: true });
    }
    let bound: f64 = d.iter().map(|v| 1.0 - v).sum();
    let inside = delta.delta1 <= bound + REGION_TOL && delta.delta2 <= bound + REGION_TOL;
    Ok(LossyCommonInformation {
        rate: inside.then(|| ExtendedRate::Finite(common_information_from_correlations(d))),
        in_d_w: inside,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    /// `R0 + R1 + R2 - R_{X1,X2}(Δ1, Δ2)`.
    pub pangloss_slack: f64,
    /// `R0 + R1 - R_{X1}(Δ1)`.
    pub marginal1_slack: f64,
    /// `R0 + R2 - R_{X2}(Δ2)`.
    pub marginal2_slack: f64,
    pub holds: bool,
}

/// Check the Pangloss bound and the two marginal bounds for a computed point.
/// Marginals are the `n`-dimensional unit-variance correlated blocks.
pub fn check_pangloss_and_marginal_bounds(
    point: &RateRegionPoint,
    decomp: &CanonicalDecomposition,
    delta: DistortionPair,
) -> Result<BoundsReport> {
    let n = decomp.n();
    let joint = joint_rdf_oracle(&decomp.d, (0, 0), delta, None)?.rate;
    let pangloss_slack = point.sum_rate - joint;
    let marginal1_slack = point.r0 + point.r1 - marginal_rdf(n, delta.delta1)?;
    let marginal2_slack = point.r0 + point.r2 - marginal_rdf(n, delta.delta2)?;
    Ok(BoundsReport {
        pangloss_slack,
        marginal1_slack,
        marginal2_slack,
        holds: pangloss_slack >= -BOUND_TOL && marginal1_slack >= -BOUND_TOL && marginal2_slack >= -BOUND_TOL,
    })
}
