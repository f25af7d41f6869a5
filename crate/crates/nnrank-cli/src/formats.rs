//! File formats: tensor JSON, certificate JSON, and census reports.
//!
//! Tensor files use plain JSON numbers in the documented row-major layout
//! (last index fastest). Certificate files encode every floating-point
//! field as an exact decimal string, so a round trip through disk
//! reproduces identical verification decisions. All writers emit stable,
//! deterministic bytes for fixed inputs.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use nnrank_core::census::{Distribution, ExperimentReport};
use nnrank_core::generic::JacobianReport;
use nnrank_core::nonneg::RankInterval;
use nnrank_core::tensor::{Decomposition, DenseTensor, Rank1Term, Shape};
use nnrank_core::witness::{MaxRankCertificate, TypicalityCertificate, WitnessBall};

use crate::decimal::{exact_decimal, parse_decimal};

/// On-disk tensor: `{"dims": [...], "values": [...]}` with values in
/// row-major order, last index fastest, 1-based index convention.
#[derive(Debug, Serialize, Deserialize)]
pub struct TensorFile {
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
}

pub fn tensor_to_json(t: &DenseTensor) -> String {
    let file = TensorFile {
        dims: t.shape().dims().to_vec(),
        values: t.values().to_vec(),
    };
    to_pretty_json(&file)
}

/// Parse a tensor file. Rejects length mismatches always, and negative or
/// non-finite values when `require_nonnegative` is set.
pub fn tensor_from_json(text: &str, require_nonnegative: bool) -> Result<DenseTensor> {
    let file: TensorFile = serde_json::from_str(text).context("invalid tensor JSON")?;
    let shape = Shape::new(file.dims).map_err(|e| anyhow!("bad dims: {e}"))?;
    let tensor = DenseTensor::new(shape, file.values).map_err(|e| anyhow!("bad values: {e}"))?;
    if let Some(pos) = tensor.values().iter().position(|v| !v.is_finite()) {
        bail!("non-finite tensor value at offset {pos}");
    }
    if require_nonnegative {
        if let Some((offset, value)) = tensor.first_negative() {
            bail!("negative tensor value {value} at offset {offset}; this operation requires a nonnegative tensor");
        }
    }
    Ok(tensor)
}

fn decomposition_strings(dec: &Decomposition) -> Vec<Vec<Vec<String>>> {
    dec.terms()
        .iter()
        .map(|term| {
            term.factors()
                .iter()
                .map(|f| f.iter().map(|&v| exact_decimal(v)).collect())
                .collect()
        })
        .collect()
}

fn decomposition_from_strings(
    shape: &Shape,
    terms: &[Vec<Vec<String>>],
) -> Result<Decomposition> {
    let parsed: Vec<Rank1Term> = terms
        .iter()
        .map(|term| {
            let factors: Result<Vec<Vec<f64>>> = term
                .iter()
                .map(|f| f.iter().map(|s| parse_decimal(s)).collect())
                .collect();
            Ok(Rank1Term::new(factors?))
        })
        .collect::<Result<_>>()?;
    Decomposition::new(shape.clone(), parsed).map_err(|e| anyhow!("malformed terms: {e}"))
}

fn tensor_strings(t: &DenseTensor) -> Vec<String> {
    t.values().iter().map(|&v| exact_decimal(v)).collect()
}

fn tensor_from_strings(shape: &Shape, values: &[String]) -> Result<DenseTensor> {
    let parsed: Vec<f64> = values
        .iter()
        .map(|s| parse_decimal(s))
        .collect::<Result<_>>()?;
    DenseTensor::new(shape.clone(), parsed).map_err(|e| anyhow!("bad tensor values: {e}"))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JacobianReportFile {
    pub dims: Vec<usize>,
    pub r: usize,
    pub point_seed: u64,
    pub jac_rows: usize,
    pub jac_cols: usize,
    pub achieved_rank: usize,
    pub full_row_rank: bool,
    pub trials: usize,
}

impl JacobianReportFile {
    pub fn from_report(rep: &JacobianReport) -> Self {
        Self {
            dims: rep.shape.dims().to_vec(),
            r: rep.r,
            point_seed: rep.point_seed,
            jac_rows: rep.jac_rows,
            jac_cols: rep.jac_cols,
            achieved_rank: rep.achieved_rank,
            full_row_rank: rep.full_row_rank,
            trials: rep.trials,
        }
    }

    pub fn into_report(self) -> Result<JacobianReport> {
        Ok(JacobianReport {
            shape: Shape::new(self.dims).map_err(|e| anyhow!("bad report dims: {e}"))?,
            r: self.r,
            point_seed: self.point_seed,
            jac_rows: self.jac_rows,
            jac_cols: self.jac_cols,
            achieved_rank: self.achieved_rank,
            full_row_rank: self.full_row_rank,
            trials: self.trials,
        })
    }
}

/// On-disk typicality certificate. Every float is an exact decimal string.
#[derive(Debug, Serialize, Deserialize)]
pub struct TypicalityCertificateFile {
    pub dims: Vec<usize>,
    /// 1-based fiber mode chosen internally (echoed for transparency).
    pub fiber_mode: usize,
    pub r: usize,
    pub head_terms: Vec<Vec<Vec<String>>>,
    pub tail_terms: Vec<Vec<Vec<String>>>,
    pub witness: Vec<String>,
    pub total: Vec<String>,
    pub ball_margin: String,
    pub jacobian: JacobianReportFile,
}

pub fn certificate_to_json(cert: &TypicalityCertificate) -> String {
    let file = TypicalityCertificateFile {
        dims: cert.shape.dims().to_vec(),
        fiber_mode: cert.shape.fiber_mode() + 1,
        r: cert.r,
        head_terms: decomposition_strings(&cert.head_terms),
        tail_terms: decomposition_strings(&cert.tail_terms),
        witness: tensor_strings(&cert.witness),
        total: tensor_strings(&cert.total),
        ball_margin: exact_decimal(cert.ball_margin),
        jacobian: JacobianReportFile::from_report(&cert.jacobian_report),
    };
    to_pretty_json(&file)
}

pub fn certificate_from_json(text: &str) -> Result<TypicalityCertificate> {
    let file: TypicalityCertificateFile =
        serde_json::from_str(text).context("invalid certificate JSON")?;
    let shape = Shape::new(file.dims).map_err(|e| anyhow!("bad dims: {e}"))?;
    Ok(TypicalityCertificate {
        shape: shape.clone(),
        r: file.r,
        head_terms: decomposition_from_strings(&shape, &file.head_terms)?,
        tail_terms: decomposition_from_strings(&shape, &file.tail_terms)?,
        witness: tensor_from_strings(&shape, &file.witness)?,
        total: tensor_from_strings(&shape, &file.total)?,
        ball_margin: parse_decimal(&file.ball_margin)?,
        jacobian_report: file.jacobian.into_report()?,
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MaxRankCertificateFile {
    pub dims: Vec<usize>,
    pub fiber_mode: usize,
    pub tensor: Vec<String>,
    pub distance: String,
    pub margin: String,
    pub certified_rank: usize,
}

pub fn max_rank_certificate_to_json(cert: &MaxRankCertificate) -> String {
    let file = MaxRankCertificateFile {
        dims: cert.shape.dims().to_vec(),
        fiber_mode: cert.shape.fiber_mode() + 1,
        tensor: tensor_strings(&cert.tensor),
        distance: exact_decimal(cert.distance),
        margin: exact_decimal(cert.margin),
        certified_rank: cert.certified_rank,
    };
    to_pretty_json(&file)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WitnessFile {
    pub dims: Vec<usize>,
    pub fiber_mode: usize,
    /// 1-based support indices, sorted lexicographically.
    pub support: Vec<Vec<usize>>,
    pub center: TensorFile,
    pub radius: String,
}

pub fn witness_to_json(ball: &WitnessBall) -> String {
    let file = WitnessFile {
        dims: ball.shape.dims().to_vec(),
        fiber_mode: ball.shape.fiber_mode() + 1,
        support: ball.support.clone(),
        center: TensorFile {
            dims: ball.center.shape().dims().to_vec(),
            values: ball.center.values().to_vec(),
        },
        radius: exact_decimal(ball.radius),
    };
    to_pretty_json(&file)
}

/// Decomposition JSON: terms as factor vectors with plain numbers.
#[derive(Debug, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub dims: Vec<usize>,
    pub fiber_mode: usize,
    pub term_count: usize,
    pub terms: Vec<Vec<Vec<f64>>>,
}

pub fn decomposition_to_json(dec: &Decomposition) -> String {
    let file = DecompositionFile {
        dims: dec.shape().dims().to_vec(),
        fiber_mode: dec.shape().fiber_mode() + 1,
        term_count: dec.rank(),
        terms: dec
            .terms()
            .iter()
            .map(|t| t.factors().to_vec())
            .collect(),
    };
    to_pretty_json(&file)
}

#[derive(Debug, Serialize)]
pub struct IntervalFile {
    pub dims: Vec<usize>,
    pub fiber_mode: usize,
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
    pub lower_provenance: &'static str,
    pub upper_provenance: &'static str,
}

pub fn interval_to_json(shape: &Shape, iv: &RankInterval) -> String {
    to_pretty_json(&IntervalFile {
        dims: shape.dims().to_vec(),
        fiber_mode: shape.fiber_mode() + 1,
        lower: iv.lower,
        upper: iv.upper,
        exact: iv.exact,
        lower_provenance: iv.lower_provenance.as_str(),
        upper_provenance: iv.upper_provenance.as_str(),
    })
}

/// Human-readable interval line, e.g. `[4,4] exact (fooling-set / ntf-fit)`.
pub fn interval_to_text(iv: &RankInterval) -> String {
    format!(
        "[{},{}] {} ({} / {})",
        iv.lower,
        iv.upper,
        if iv.exact { "exact" } else { "bounds" },
        iv.lower_provenance.as_str(),
        iv.upper_provenance.as_str()
    )
}

pub fn distribution_name(d: &Distribution) -> String {
    match d {
        Distribution::Uniform01 => "uniform01".to_string(),
        Distribution::Exponential => "exponential".to_string(),
        Distribution::IndicatorNoise { sigma } => format!("indicator-noise({sigma})"),
    }
}

/// Parse a distribution tag: `uniform01`, `exponential`, or
/// `indicator-noise(SIGMA)` (also accepted with `:` in place of parens).
pub fn parse_distribution(s: &str) -> Result<Distribution> {
    let s = s.trim();
    match s {
        "uniform01" => return Ok(Distribution::Uniform01),
        "exponential" => return Ok(Distribution::Exponential),
        _ => {}
    }
    let sigma = s
        .strip_prefix("indicator-noise(")
        .and_then(|rest| rest.strip_suffix(')'))
        .or_else(|| s.strip_prefix("indicator-noise:"))
        .ok_or_else(|| {
            anyhow!("unknown distribution {s:?}; expected uniform01, exponential, or indicator-noise(SIGMA)")
        })?;
    let sigma: f64 = sigma
        .trim()
        .parse()
        .with_context(|| format!("bad sigma in {s:?}"))?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        bail!("sigma must be positive and finite");
    }
    Ok(Distribution::IndicatorNoise { sigma })
}

#[derive(Debug, Serialize)]
struct NtfConfigFile {
    restarts: usize,
    max_iters: usize,
    residual_tol: f64,
    seed: u64,
    init_scale: Option<f64>,
}

#[derive(Debug, Serialize)]
struct CensusConfigFile {
    dims: Vec<usize>,
    fiber_mode: usize,
    samples: usize,
    distribution: String,
    seed: u64,
    ntf: NtfConfigFile,
}

#[derive(Debug, Serialize)]
struct CensusSummaryFile {
    config: CensusConfigFile,
    grank_used: usize,
    slice_bound: usize,
    histogram: BTreeMap<String, usize>,
    exact_fraction: f64,
    range_check: bool,
    flagged: Vec<usize>,
}

/// JSON summary of a census: config echo, histogram, and range check.
pub fn census_to_json(report: &ExperimentReport) -> String {
    let cfg = &report.config;
    let histogram: BTreeMap<String, usize> = report
        .histogram
        .iter()
        .map(|(&(lo, hi), &count)| {
            let key = if lo == hi {
                format!("{lo}")
            } else {
                format!("[{lo},{hi}]")
            };
            (key, count)
        })
        .collect();
    to_pretty_json(&CensusSummaryFile {
        config: CensusConfigFile {
            dims: cfg.shape.dims().to_vec(),
            fiber_mode: cfg.shape.fiber_mode() + 1,
            samples: cfg.samples,
            distribution: distribution_name(&cfg.distribution),
            seed: cfg.seed,
            ntf: NtfConfigFile {
                restarts: cfg.ntf.restarts,
                max_iters: cfg.ntf.max_iters,
                residual_tol: cfg.ntf.residual_tol,
                seed: cfg.ntf.seed,
                init_scale: cfg.ntf.init_scale,
            },
        },
        grank_used: report.grank_used,
        slice_bound: cfg.shape.slice_bound(),
        histogram,
        exact_fraction: report.exact_fraction,
        range_check: report.range_check,
        flagged: report.flagged.clone(),
    })
}

/// CSV rows of a census: one line per sample.
pub fn census_to_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "sample_index",
        "lower",
        "upper",
        "exact",
        "lower_provenance",
        "upper_provenance",
    ])?;
    for (i, iv) in report.intervals.iter().enumerate() {
        w.write_record([
            i.to_string(),
            iv.lower.to_string(),
            iv.upper.to_string(),
            iv.exact.to_string(),
            iv.lower_provenance.as_str().to_string(),
            iv.upper_provenance.as_str().to_string(),
        ])?;
    }
    let bytes = w.into_inner().context("csv flush")?;
    String::from_utf8(bytes).context("csv is utf-8")
}

pub fn grank_to_json(shape: &Shape, rank: usize, report: &JacobianReport) -> String {
    #[derive(Serialize)]
    struct GrankFile {
        dims: Vec<usize>,
        fiber_mode: usize,
        generic_rank: usize,
        jacobian: JacobianReportFile,
    }
    to_pretty_json(&GrankFile {
        dims: shape.dims().to_vec(),
        fiber_mode: shape.fiber_mode() + 1,
        generic_rank: rank,
        jacobian: JacobianReportFile::from_report(report),
    })
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
