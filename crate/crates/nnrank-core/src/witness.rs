//! Witness tensors, maximal-rank balls, and typicality certificates.
//!
//! The congruence index set picks exactly one entry per fiber; its 0/1
//! indicator tensor sits at the center of a Euclidean ball of radius
//! `1/(3N)` (N the slice bound) in which every nonnegative tensor has
//! nonnegative rank exactly N. That ball gives two kinds of certificates:
//!
//! - [`certify_max_rank`]: membership in the ball certifies rank N with no
//!   factorization search at all.
//! - [`typical_rank_witness`]: for any r between the generic rank and N, a
//!   perturbed N-term decomposition whose total stays inside the ball. The
//!   head of r terms is a partial sum of a minimal decomposition, so its sum
//!   has rank exactly r; a full-row-rank Jacobian at the head makes the CP
//!   map locally open there, so a whole neighborhood shares rank r and r is
//!   a typical nonnegative rank.
//!
//! Certificates are verified independently: the verifier recomputes every
//! claim from the raw terms, using exact integer arithmetic for the
//! Jacobian rank, and shares no intermediate state with the generator.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::generic::{exact_jacobian_rank, jacobian_generic_rank, JacobianReport, DEFAULT_TRIALS};
use crate::rng;
use crate::tensor::{eval_cp, frobenius_distance, Decomposition, DenseTensor, Rank1Term, Shape};

/// Retry budget for certificate generation.
const MAX_ATTEMPTS: usize = 10;
/// Perturbed factor entries are snapped to this many fractional bits, so
/// the exact Jacobian rank applies to the certificate as stored.
const SNAP_BITS: u32 = 30;

/// The witness tensor with its certified maximal-rank ball.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessBall {
    /// Tensor format.
    pub shape: Shape,
    /// The 1-based multi-indices of the support, sorted lexicographically;
    /// exactly one per fiber, `slice_bound()` in total.
    pub support: Vec<Vec<usize>>,
    /// 0/1 indicator of the support.
    pub center: DenseTensor,
    /// Ball radius `1 / (3 * slice_bound())`.
    pub radius: f64,
}

/// Certificate that a tensor has the maximal nonnegative rank of its
/// format, by strict membership in the witness ball.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxRankCertificate {
    pub shape: Shape,
    pub tensor: DenseTensor,
    pub distance: f64,
    pub margin: f64,
    pub certified_rank: usize,
}

/// Certificate that `r` is a typical nonnegative rank of the format.
#[derive(Debug, Clone, PartialEq)]
pub struct TypicalityCertificate {
    pub shape: Shape,
    pub r: usize,
    /// First r terms of the perturbed decomposition (the typical-rank point).
    pub head_terms: Decomposition,
    /// Remaining N - r terms.
    pub tail_terms: Decomposition,
    /// Sum of the head terms; the tensor whose rank is certified to be r.
    pub witness: DenseTensor,
    /// Sum of all N terms; lies strictly inside the witness ball.
    pub total: DenseTensor,
    /// Ball radius minus the distance of `total` from the center.
    pub ball_margin: f64,
    /// Exact Jacobian rank test at the head terms; must be full row rank.
    pub jacobian_report: JacobianReport,
}

/// Result of independently verifying a certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub valid: bool,
    pub reasons: Vec<String>,
}

/// All 1-based multi-indices whose coordinate sum is divisible by the
/// fiber-mode dimension, sorted lexicographically.
///
/// For each assignment of the non-fiber coordinates exactly one fiber
/// coordinate satisfies the congruence, so the set has exactly one member
/// per fiber and `slice_bound()` members in total.
pub fn index_set(shape: &Shape) -> Vec<Vec<usize>> {
    let nf = shape.fiber_dim();
    let mut out = Vec::with_capacity(shape.slice_bound());
    // Layout order enumerates multi-indices in ascending lexicographic order.
    for idx in shape.indices() {
        let sum: usize = idx.iter().map(|&i| i + 1).sum();
        if sum.is_multiple_of(nf) {
            out.push(idx.iter().map(|&i| i + 1).collect());
        }
    }
    out
}

/// The witness ball of the format: indicator center and radius `1/(3N)`.
pub fn witness_tensor(shape: &Shape) -> WitnessBall {
    let support = index_set(shape);
    let mut center = DenseTensor::zeros(shape.clone());
    for idx1 in &support {
        let idx0: Vec<usize> = idx1.iter().map(|&i| i - 1).collect();
        let lin = shape.linear_index(&idx0);
        center.values_mut()[lin] = 1.0;
    }
    let radius = 1.0 / (3.0 * shape.slice_bound() as f64);
    WitnessBall { shape: shape.clone(), support, center, radius }
}

/// Certify that `t` has the maximal nonnegative rank of its format.
///
/// Theorem-backed: strict membership in the witness ball implies the rank,
/// so no factorization search runs. `OutsideBall` means "no certificate",
/// not "the rank is smaller".
pub fn certify_max_rank(t: &DenseTensor) -> Result<MaxRankCertificate, Error> {
    if let Some((offset, value)) = t.first_negative() {
        return Err(Error::NegativeEntry { offset, value });
    }
    let ball = witness_tensor(t.shape());
    let distance = frobenius_distance(t, &ball.center)?;
    if distance < ball.radius {
        Ok(MaxRankCertificate {
            shape: t.shape().clone(),
            tensor: t.clone(),
            distance,
            margin: ball.radius - distance,
            certified_rank: t.shape().slice_bound(),
        })
    } else {
        Err(Error::OutsideBall { distance, radius: ball.radius })
    }
}

fn snap(x: f64) -> f64 {
    let scale = (1u64 << SNAP_BITS) as f64;
    libm::round(x * scale) / scale
}

/// One perturbed basis term per support index, in support order. Every
/// factor entry gets independent uniform(0, delta) noise and is snapped to
/// dyadic rationals.
fn perturbed_terms(
    shape: &Shape,
    support: &[Vec<usize>],
    delta: f64,
    rng: &mut impl rand_core::RngCore,
) -> Vec<Rank1Term> {
    support
        .iter()
        .map(|idx1| {
            let factors = shape
                .dims()
                .iter()
                .enumerate()
                .map(|(j, &n)| {
                    (0..n)
                        .map(|l| {
                            let base = if l + 1 == idx1[j] { 1.0 } else { 0.0 };
                            snap(base + rng::uniform01(rng) * delta)
                        })
                        .collect()
                })
                .collect();
            Rank1Term::new(factors)
        })
        .collect()
}

/// Generate a typicality certificate for rank `r` of the format.
///
/// Requires `generic_rank <= r <= slice_bound()`. The lower end is checked
/// by a Jacobian probe: below the generic rank, full row rank is
/// unreachable at any point, and the error carries the probe report with
/// its rank cap. Deterministic given the seed.
pub fn typical_rank_witness(
    shape: &Shape,
    r: usize,
    seed: u64,
) -> Result<TypicalityCertificate, Error> {
    let n = shape.slice_bound();
    if r < 1 || r > n {
        return Err(Error::RankOutOfRange { r, max: n, jacobian: None });
    }
    let probe = jacobian_generic_rank(shape, r, DEFAULT_TRIALS, rng::derive_seed(seed, u64::MAX))?;
    if !probe.full_row_rank {
        return Err(Error::RankOutOfRange { r, max: n, jacobian: Some(Box::new(probe)) });
    }

    let ball = witness_tensor(shape);
    let eps = ball.radius;
    let d = shape.order();
    // Small enough that the assembled total usually lands inside the ball on
    // the first try; halved until it does, with margin eps/2 to spare.
    let delta0 = eps / (4.0 * n as f64 * d as f64);

    for attempt in 0..MAX_ATTEMPTS {
        let attempt_seed = rng::derive_seed(seed, attempt as u64);
        let mut rng = rng::stream(attempt_seed, 0);
        let mut delta = delta0;
        let (terms, total, distance) = loop {
            let terms = perturbed_terms(shape, &ball.support, delta, &mut rng);
            let dec = Decomposition::new(shape.clone(), terms)?;
            let total = eval_cp(&dec);
            let distance = frobenius_distance(&total, &ball.center)?;
            if distance < eps / 2.0 {
                break (dec, total, distance);
            }
            delta /= 2.0;
        };

        let mut all_terms = terms.terms().to_vec();
        let tail_vec = all_terms.split_off(r);
        let head = Decomposition::new(shape.clone(), all_terms)?;
        let tail = Decomposition::new(shape.clone(), tail_vec)?;

        let achieved = exact_jacobian_rank(&head)?;
        if achieved == shape.total() {
            let witness = eval_cp(&head);
            let report = JacobianReport {
                shape: shape.clone(),
                r,
                point_seed: attempt_seed,
                jac_rows: shape.total(),
                jac_cols: r * shape.dims().iter().sum::<usize>(),
                achieved_rank: achieved,
                full_row_rank: true,
                trials: 1,
            };
            return Ok(TypicalityCertificate {
                shape: shape.clone(),
                r,
                head_terms: head,
                tail_terms: tail,
                witness,
                total,
                ball_margin: eps - distance,
                jacobian_report: report,
            });
        }
    }
    Err(Error::RetriesExhausted { attempts: MAX_ATTEMPTS })
}

/// Tolerance for recomputation consistency checks (sums of products of
/// order-one values).
const RECOMPUTE_TOL: f64 = 1e-12;

fn max_abs_diff(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0, |acc, (&x, &y)| {
            let d = libm::fabs(x - y);
            if d > acc {
                d
            } else {
                acc
            }
        })
}

/// Independently re-check every claim of a typicality certificate.
///
/// Recomputes the head and total sums, the distance to the recomputed ball
/// center, nonnegativity, and the exact Jacobian rank at the head terms.
/// Returns all violated conditions; valid means none.
pub fn verify_typicality_certificate(cert: &TypicalityCertificate) -> Verification {
    let mut reasons: Vec<String> = Vec::new();
    let shape = &cert.shape;
    let n = shape.slice_bound();

    if cert.r < 1 || cert.r > n {
        reasons.push(format!("rank out of range: r = {} not in [1, {n}]", cert.r));
    }
    if cert.head_terms.shape() != shape
        || cert.tail_terms.shape() != shape
        || cert.witness.shape() != shape
        || cert.total.shape() != shape
        || &cert.jacobian_report.shape != shape
    {
        reasons.push(String::from("shape mismatch between certificate fields"));
        return Verification { valid: false, reasons };
    }
    if cert.head_terms.rank() != cert.r {
        reasons.push(format!(
            "term count mismatch: head has {} terms, r = {}",
            cert.head_terms.rank(),
            cert.r
        ));
    }
    if cert.head_terms.rank() + cert.tail_terms.rank() != n {
        reasons.push(format!(
            "term count mismatch: head + tail = {}, slice bound = {n}",
            cert.head_terms.rank() + cert.tail_terms.rank()
        ));
    }

    let mut finite = true;
    for dec in [&cert.head_terms, &cert.tail_terms] {
        for term in dec.terms() {
            for factor in term.factors() {
                for &v in factor {
                    if !v.is_finite() {
                        finite = false;
                    } else if v < 0.0 {
                        reasons.push(format!("negative entry: factor value {v}"));
                    }
                }
            }
        }
    }
    if !finite {
        reasons.push(String::from("nonfinite entry in factors"));
    }
    // Deduplicate repeated per-entry findings.
    reasons.dedup();

    let head_sum = eval_cp(&cert.head_terms);
    if max_abs_diff(&head_sum, &cert.witness) > RECOMPUTE_TOL {
        reasons.push(String::from("witness mismatch: head terms do not sum to witness"));
    }
    let mut total_sum = head_sum;
    {
        let tail_sum = eval_cp(&cert.tail_terms);
        for (acc, &v) in total_sum.values_mut().iter_mut().zip(tail_sum.values()) {
            *acc += v;
        }
    }
    if max_abs_diff(&total_sum, &cert.total) > RECOMPUTE_TOL {
        reasons.push(String::from("total mismatch: head + tail do not sum to total"));
    }

    let ball = witness_tensor(shape);
    let distance = frobenius_distance(&cert.total, &ball.center).expect("shapes checked");
    if !(distance < ball.radius) {
        reasons.push(format!(
            "outside ball: distance {distance} >= radius {}",
            ball.radius
        ));
    }
    if libm::fabs(cert.ball_margin - (ball.radius - distance)) > RECOMPUTE_TOL
        || !(cert.ball_margin > 0.0)
    {
        reasons.push(String::from("margin mismatch"));
    }

    if finite && cert.head_terms.rank() >= 1 {
        let achieved = exact_jacobian_rank(&cert.head_terms).expect("finite checked");
        if achieved != shape.total() {
            reasons.push(format!(
                "jacobian not full row rank: achieved {achieved} of {} rows",
                shape.total()
            ));
        }
        let rep = &cert.jacobian_report;
        if !rep.full_row_rank
            || rep.achieved_rank != achieved
            || rep.jac_rows != shape.total()
            || rep.r != cert.r
        {
            reasons.push(String::from("jacobian report mismatch"));
        }
    } else if cert.head_terms.rank() == 0 {
        reasons.push(String::from("jacobian not full row rank: no head terms"));
    }

    Verification { valid: reasons.is_empty(), reasons }
}
