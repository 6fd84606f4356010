use std::fs;

use gwci::information::{common_information_from_correlations, SearchMode};
use gwci::io::{matrix_to_rows, rows_to_matrix, MatrixRows};
use gwci::rate_region::{gray_wyner_triple, weighted_functional, DistortionPair, RateRegionPoint};
use gwci::realization::{sample_header, validate_qw};
use gwci::{
    assemble_joint_covariance, canonical_decomposition, check_pangloss_and_marginal_bounds, conditional_independence_gap,
    lift_to_original, linalg, minimize_lower_bound, mutual_information, verify_canonical_form, wyner_common_information,
    CanonicalDecomposition, CovarianceFile, Error, ExtendedRate, JointGaussianPair, NumericTolerances, QwParameter, Unit,
};
use serde::{Deserialize, Serialize};

use crate::output::{csv, emit, json, Cell};
use crate::{
    Common, CommonInfoArgs, Failure, Format, RatePointArgs, RealizeArgs, SampleArgs, SweepArgs,
};

pub struct Loaded {
    pub pair: JointGaussianPair,
    pub decomp: CanonicalDecomposition,
    pub tol: NumericTolerances,
}

pub fn load(common: &Common) -> Result<Loaded, Failure> {
    let tol = common.tolerances()?;
    let text = fs::read_to_string(&common.input)
        .map_err(|e| Failure::Parse(format!("cannot read {}: {e}", common.input.display())))?;
    let file = CovarianceFile::from_json(&text).map_err(|e| Failure::Parse(e.to_string()))?;
    let pair = file.into_pair(&tol)?;
    let decomp = canonical_decomposition(&pair, &tol)?;
    Ok(Loaded { pair, decomp, tol })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum QwFile {
    Bare(MatrixRows),
    Keyed {
        #[serde(rename = "Qw")]
        qw: MatrixRows,
    },
}

/// `identity` or a JSON file with the matrix.
pub fn parse_qw(spec: &str, d: &[f64]) -> Result<QwParameter, Failure> {
    if spec == "identity" {
        return Ok(QwParameter::identity(d.len()));
    }
    let text = fs::read_to_string(spec).map_err(|e| Failure::Parse(format!("cannot read Q_W file {spec}: {e}")))?;
    let rows = match serde_json::from_str::<QwFile>(&text) {
        Ok(QwFile::Bare(rows)) | Ok(QwFile::Keyed { qw: rows }) => rows,
        Err(e) => return Err(Failure::Parse(format!("Q_W file {spec}: {e}"))),
    };
    let m = rows_to_matrix(&rows).map_err(|e| Failure::Parse(e.to_string()))?;
    Ok(validate_qw(d, &m)?)
}

/// `start:stop:count`, inclusive and evenly spaced, or a single number.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Parse(format!("expected start:stop:count or a number, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![single.trim().parse().map_err(|_| bad())?]),
        [start, stop, count] => {
            let start: f64 = start.trim().parse().map_err(|_| bad())?;
            let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
            let count: usize = count.trim().parse().map_err(|_| bad())?;
            match count {
                0 => Err(bad()),
                1 => Ok(vec![start]),
                _ => Ok((0..count).map(|k| start + (stop - start) * k as f64 / (count - 1) as f64).collect()),
            }
        }
        _ => Err(bad()),
    }
}

fn format_or(common: &Common, default: Format) -> Format {
    common.format.unwrap_or(default)
}

fn scale_point(mut p: RateRegionPoint, unit: Unit) -> RateRegionPoint {
    for v in [&mut p.r0, &mut p.r1, &mut p.r2, &mut p.sum_rate, &mut p.joint_rdf, &mut p.pangloss_gap] {
        *v = unit.from_nats(*v);
    }
    p
}

#[derive(Serialize)]
struct CanonicalOut {
    decomposition: gwci::canonical::CanonicalJson,
    rank1: usize,
    rank2: usize,
    verification: gwci::CanonicalReport,
}

pub fn canonical(common: &Common) -> Result<(), Failure> {
    let l = load(common)?;
    let report = verify_canonical_form(&l.decomp, &l.pair);
    let text = match format_or(common, Format::Json) {
        Format::Json => json(&CanonicalOut {
            decomposition: l.decomp.to_json(),
            rank1: l.decomp.rank1,
            rank2: l.decomp.rank2,
            verification: report,
        }),
        Format::Csv => {
            let rows: Vec<Vec<Cell>> = l.decomp.d.iter().enumerate().map(|(j, &v)| vec![Cell::Num((j + 1) as f64), Cell::Num(v)]).collect();
            csv(&["index", "d"], &rows)
        }
    };
    emit(&text, common.output.as_deref())
}

fn unit_name(unit: Unit) -> &'static str {
    match unit {
        Unit::Nats => "nats",
        Unit::Bits => "bits",
    }
}

fn scalar_output(common: &Common, name: &str, value: ExtendedRate) -> Result<(), Failure> {
    let unit = common.unit();
    let v = value.in_unit(unit);
    let text = match format_or(common, Format::Json) {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert(name.into(), serde_json::to_value(ExtendedRate::from_f64(v)).expect("rates serialize"));
            obj.insert("unit".into(), unit_name(unit).into());
            json(&obj)
        }
        Format::Csv => csv(&["quantity", "value", "unit"], &[vec![Cell::Text(name.into()), Cell::Num(v), Cell::Text(unit_name(unit).into())]]),
    };
    emit(&text, common.output.as_deref())
}

pub fn mutual_info(common: &Common) -> Result<(), Failure> {
    let l = load(common)?;
    scalar_output(common, "mutual_information", mutual_information(&l.decomp))
}

#[derive(Serialize)]
struct FullSearchSummary {
    starts: usize,
    steps: usize,
    seed: u64,
    evaluations: usize,
    best_value: ExtendedRate,
    /// Best value found minus the closed form; negative would falsify it.
    excess_over_closed_form: f64,
    falsified: bool,
}

#[derive(Serialize)]
struct CommonInfoOut {
    common_information: ExtendedRate,
    unit: &'static str,
    d: Vec<f64>,
    #[serde(rename = "Qw_star")]
    qw_star: MatrixRows,
    diagonal_search_q: Vec<f64>,
    full_search: Option<FullSearchSummary>,
}

pub fn common_info(args: &CommonInfoArgs) -> Result<(), Failure> {
    let common = &args.common;
    let l = load(common)?;
    let unit = common.unit();
    let cw = match wyner_common_information(&l.decomp) {
        Ok(ci) => ci,
        Err(Error::IdenticalPartPresent { p11 }) => {
            eprintln!("warning: identical part of dimension {p11}; common information is infinite");
            return scalar_output(common, "common_information", ExtendedRate::Infinite);
        }
        Err(e) => return Err(e.into()),
    };
    let d = &l.decomp.d;
    let diagonal = minimize_lower_bound(d, SearchMode::Diagonal, l.tol.opt_tol)?;
    let full = if d.is_empty() || args.starts == 0 {
        None
    } else {
        let m = minimize_lower_bound(d, SearchMode::Full { starts: args.starts, steps: args.steps, seed: args.seed }, l.tol.opt_tol)?;
        let excess = m.value.value() - common_information_from_correlations(d);
        Some(FullSearchSummary {
            starts: args.starts,
            steps: args.steps,
            seed: args.seed,
            evaluations: m.evaluations,
            best_value: ExtendedRate::from_f64(m.value.in_unit(unit)),
            excess_over_closed_form: unit.from_nats(excess),
            falsified: excess < -1e-8,
        })
    };
    let value = cw.value.in_unit(unit);
    match format_or(common, Format::Json) {
        Format::Json => {
            let out = CommonInfoOut {
                common_information: ExtendedRate::from_f64(value),
                unit: unit_name(unit),
                d: d.clone(),
                qw_star: matrix_to_rows(cw.optimizer.matrix()),
                diagonal_search_q: diagonal.qw.diagonal(),
                full_search: full,
            };
            emit(&json(&out), common.output.as_deref())
        }
        Format::Csv => {
            let mut rows = vec![vec![Cell::Text("common_information".into()), Cell::Num(value)]];
            if let Some(f) = &full {
                rows.push(vec![Cell::Text("full_search_best".into()), Cell::Num(f.best_value.value())]);
                rows.push(vec![Cell::Text("full_search_excess".into()), Cell::Num(f.excess_over_closed_form)]);
            }
            emit(&csv(&["quantity", "value"], &rows), common.output.as_deref())
        }
    }
}

#[derive(Serialize)]
struct RealizeOut {
    d: Vec<f64>,
    #[serde(flatten)]
    realization: gwci::realization::RealizationJson,
    conditional_independence_gap: f64,
    degenerate: bool,
    boundary: bool,
}

fn correlated_part(l: &Loaded) -> Result<&[f64], Failure> {
    if l.decomp.has_identical_part() {
        return Err(Error::IdenticalPartPresent { p11: l.decomp.p11 }.into());
    }
    Ok(&l.decomp.d)
}

pub fn realize(args: &RealizeArgs) -> Result<(), Failure> {
    let l = load(&args.common)?;
    let d = correlated_part(&l)?;
    let qw = parse_qw(&args.qw, d)?;
    let real = assemble_joint_covariance(d, &qw)?;
    let gap = conditional_independence_gap(&real)?;
    if args.common.format == Some(Format::Csv) {
        return Err(Failure::Parse("realize writes JSON only".into()));
    }
    let out = RealizeOut {
        d: d.to_vec(),
        realization: real.to_json(),
        conditional_independence_gap: gap,
        degenerate: real.degenerate,
        boundary: qw.is_boundary(),
    };
    emit(&json(&out), args.common.output.as_deref())
}

pub fn sample(args: &SampleArgs) -> Result<(), Failure> {
    let l = load(&args.common)?;
    let d = correlated_part(&l)?;
    let qw = parse_qw(&args.qw, d)?;
    let real = assemble_joint_covariance(d, &qw)?;
    let draws = gwci::sample(&real, args.samples, args.seed);
    let deviation = if args.samples >= 2 {
        linalg::max_abs_diff(&linalg::sample_covariance(&draws), &real.qs)
    } else {
        f64::NAN
    };
    eprintln!("samples: {}, seed: {}, max |empirical cov - Q_s| = {deviation:.3e}", args.samples, args.seed);

    let (header, data) = if args.lift {
        let lifted = lift_to_original(&l.decomp, &draws, args.seed.wrapping_add(1))?;
        let (p1, p2) = (l.pair.p1(), l.pair.p2());
        let cols: Vec<String> = (1..=p1).map(|j| format!("x1_{j}")).chain((1..=p2).map(|j| format!("x2_{j}"))).collect();
        let dev = if args.samples >= 2 {
            linalg::max_abs_diff(&linalg::sample_covariance(&lifted), l.pair.covariance())
        } else {
            f64::NAN
        };
        eprintln!("lifted: max |empirical cov - Q| = {dev:.3e}");
        (cols, lifted)
    } else {
        (sample_header(d.len()), draws)
    };
    let text = match format_or(&args.common, Format::Csv) {
        Format::Csv => {
            let rows: Vec<Vec<Cell>> = data.row_iter().map(|r| r.iter().map(|&v| Cell::Num(v)).collect()).collect();
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            csv(&h, &rows)
        }
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("columns".into(), serde_json::to_value(&header).expect("strings serialize"));
            obj.insert("rows".into(), serde_json::to_value(matrix_to_rows(&data)).expect("finite samples serialize"));
            json(&obj)
        }
    };
    emit(&text, args.common.output.as_deref())
}

#[derive(Serialize)]
struct RatePointOut {
    unit: &'static str,
    #[serde(flatten)]
    point: RateRegionPoint,
    bounds: gwci::rate_region::BoundsReport,
}

const SWEEP_HEADER: [&str; 12] = [
    "delta1", "delta2", "alpha1", "alpha2", "R0", "R1", "R2", "sum_rate", "joint_rdf", "pangloss_gap", "in_DW", "on_plane",
];

fn sweep_row(p: &RateRegionPoint, alpha1: f64, alpha2: f64) -> Vec<Cell> {
    vec![
        Cell::Num(p.distortions.delta1),
        Cell::Num(p.distortions.delta2),
        Cell::Num(alpha1),
        Cell::Num(alpha2),
        Cell::Num(p.r0),
        Cell::Num(p.r1),
        Cell::Num(p.r2),
        Cell::Num(p.sum_rate),
        Cell::Num(p.joint_rdf),
        Cell::Num(p.pangloss_gap),
        Cell::Bool(p.in_d_w),
        Cell::Bool(p.on_pangloss_plane),
    ]
}

pub fn rate_point(args: &RatePointArgs) -> Result<(), Failure> {
    let l = load(&args.common)?;
    let d = correlated_part(&l)?;
    let qw = parse_qw(&args.qw, d)?;
    let delta = DistortionPair::new(args.delta1, args.delta2)?;
    let point = gray_wyner_triple(&l.decomp, &qw, delta, args.grid)?;
    let bounds = check_pangloss_and_marginal_bounds(&point, &l.decomp, delta)?;
    if point.general_qw {
        eprintln!("warning: Q_W is not diagonal; R1 and R2 use the eigenvalues of the conditional covariances");
    }
    let unit = args.common.unit();
    let point = scale_point(point, unit);
    let text = match format_or(&args.common, Format::Json) {
        Format::Json => json(&RatePointOut { unit: unit_name(unit), point, bounds }),
        Format::Csv => csv(&SWEEP_HEADER, &[sweep_row(&point, 1.0, 1.0)]),
    };
    emit(&text, args.common.output.as_deref())
}

pub fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let l = load(&args.common)?;
    let d = correlated_part(&l)?;
    let fixed = args.qw.as_deref().map(|s| parse_qw(s, d)).transpose()?;
    let (d1, d2) = (parse_range(&args.delta1)?, parse_range(&args.delta2)?);
    let (a1, a2) = (parse_range(&args.alpha1)?, parse_range(&args.alpha2)?);
    let unit = args.common.unit();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &delta1 in &d1 {
        for &delta2 in &d2 {
            let delta = DistortionPair::new(delta1, delta2)?;
            for &alpha1 in &a1 {
                for &alpha2 in &a2 {
                    let qw = match &fixed {
                        Some(q) => q.clone(),
                        None => weighted_functional(&l.decomp, delta, alpha1, alpha2, l.tol.opt_tol)?.qw,
                    };
                    let p = scale_point(gray_wyner_triple(&l.decomp, &qw, delta, None)?, unit);
                    rows.push(sweep_row(&p, alpha1, alpha2));
                    points.push((alpha1, alpha2, p));
                }
            }
        }
    }
    let text = match format_or(&args.common, Format::Csv) {
        Format::Csv => csv(&SWEEP_HEADER, &rows),
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                alpha1: f64,
                alpha2: f64,
                #[serde(flatten)]
                point: &'a RateRegionPoint,
            }
            let out: Vec<Row> = points.iter().map(|(alpha1, alpha2, point)| Row { alpha1: *alpha1, alpha2: *alpha2, point }).collect();
            json(&out)
        }
    };
    emit(&text, args.common.output.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.5").unwrap(), vec![0.5]);
        assert_eq!(parse_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("0.2:0.2:1").unwrap(), vec![0.2]);
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("a:b:c").is_err());
        assert!(parse_range("0:1").is_err());
    }
}
