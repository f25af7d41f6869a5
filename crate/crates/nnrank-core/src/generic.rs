//! Generic rank of a tensor format via the Jacobian criterion.
//!
//! An integer `r` is at least the generic rank of the format exactly when
//! the Jacobian of the r-term CP map has full row rank at some point. The
//! Jacobian entries are integer polynomials in the factor entries, so
//! evaluating at a random integer point and computing the rank in exact
//! integer arithmetic decides the criterion: a random point misses the zero
//! set of the decisive minor with probability 1, and exact elimination
//! leaves no tolerance ambiguity. Real points suffice for the complex
//! criterion because the minors have integer coefficients.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::exact::{dyadic_matrix_rank, Dyadic};
use crate::rng;
use crate::tensor::{advance, Decomposition, DenseTensor, Rank1Term, Shape};

/// Number of random points tried per rank test.
pub const DEFAULT_TRIALS: usize = 3;

/// Random integer points are drawn uniformly from `[-POINT_BOX, POINT_BOX]`.
/// Any infinite grid works; this box is large enough that hitting the zero
/// set of a decisive minor has never been observed, and `trials` retries
/// cover the residual risk.
pub const POINT_BOX: i64 = 101;

/// Outcome of an exact Jacobian rank test at random points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobianReport {
    pub shape: Shape,
    pub r: usize,
    pub point_seed: u64,
    pub jac_rows: usize,
    pub jac_cols: usize,
    pub achieved_rank: usize,
    pub full_row_rank: bool,
    pub trials: usize,
}

impl JacobianReport {
    /// Upper bound on the achievable rank: the row count capped by the
    /// column count minus the r*(d-1)-dimensional scaling redundancy of the
    /// parametrization.
    pub fn rank_cap(&self) -> usize {
        let d = self.shape.order();
        let col_cap = self.r * (self.shape.dims().iter().sum::<usize>() - d + 1);
        self.jac_rows.min(col_cap)
    }
}

fn jacobian_cols(shape: &Shape, r: usize) -> usize {
    r * shape.dims().iter().sum::<usize>()
}

/// Jacobian of the CP map at the given decomposition, as a dense
/// `total x (r * sum of dims)` matrix.
///
/// Rows are indexed by tensor entries in layout order. Columns are indexed
/// term-major, then by mode, then by coordinate: the column for (term k,
/// mode j, coordinate l) holds, in the row of entry `(i_1, ..., i_d)`, the
/// value `[l == i_j] * prod_{m != j} factors_k[m][i_m]`.
pub fn jacobian(dec: &Decomposition) -> Result<DenseTensor, Error> {
    let r = dec.rank();
    if r == 0 {
        return Err(Error::InvalidTermCount);
    }
    let shape = dec.shape();
    let d = shape.order();
    let dims = shape.dims();
    let rows = shape.total();
    let cols = jacobian_cols(shape, r);

    let mut mode_offsets = vec![0usize; d];
    for j in 1..d {
        mode_offsets[j] = mode_offsets[j - 1] + dims[j - 1];
    }
    let per_term: usize = dims.iter().sum();

    let mut out = vec![0.0; rows * cols];
    let mut idx = vec![0usize; d];
    let mut row = 0;
    loop {
        for (k, term) in dec.terms().iter().enumerate() {
            for j in 0..d {
                let mut partial = 1.0;
                for m in 0..d {
                    if m != j {
                        partial *= term.factor(m)[idx[m]];
                    }
                }
                let col = k * per_term + mode_offsets[j] + idx[j];
                out[row * cols + col] = partial;
            }
        }
        row += 1;
        if !advance(&mut idx, dims) {
            break;
        }
    }
    DenseTensor::new(Shape::new(vec![rows, cols])?, out)
}

/// Exact rank of the CP-map Jacobian at the given point.
///
/// Factor entries are decomposed into exact dyadic rationals, Jacobian
/// entries are formed as exact products, and the rank is computed by
/// fraction-free integer elimination. Errors on non-finite factor entries.
pub fn exact_jacobian_rank(dec: &Decomposition) -> Result<usize, Error> {
    let r = dec.rank();
    if r == 0 {
        return Err(Error::InvalidTermCount);
    }
    let shape = dec.shape();
    let d = shape.order();
    let dims = shape.dims();
    let rows = shape.total();
    let cols = jacobian_cols(shape, r);

    for (off, term) in dec.terms().iter().enumerate() {
        for f in term.factors() {
            if let Some(pos) = f.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteEntry { offset: off * d + pos });
            }
        }
    }
    let exact_factors: Vec<Vec<Vec<Dyadic>>> = dec
        .terms()
        .iter()
        .map(|t| {
            t.factors()
                .iter()
                .map(|f| f.iter().map(|&v| Dyadic::from_f64(v)).collect())
                .collect()
        })
        .collect();

    let mut mode_offsets = vec![0usize; d];
    for j in 1..d {
        mode_offsets[j] = mode_offsets[j - 1] + dims[j - 1];
    }
    let per_term: usize = dims.iter().sum();

    let zero = Dyadic { mantissa: 0.into(), exp: 0 };
    let mut entries = vec![zero; rows * cols];
    let mut idx = vec![0usize; d];
    let mut row = 0;
    loop {
        for (k, term) in exact_factors.iter().enumerate() {
            for j in 0..d {
                let mut partial = Dyadic::one();
                for (m, factor) in term.iter().enumerate() {
                    if m != j {
                        partial = partial.mul(&factor[idx[m]]);
                    }
                }
                let col = k * per_term + mode_offsets[j] + idx[j];
                entries[row * cols + col] = partial;
            }
        }
        row += 1;
        if !advance(&mut idx, dims) {
            break;
        }
    }
    Ok(dyadic_matrix_rank(rows, cols, &entries))
}

fn random_integer_point(shape: &Shape, r: usize, rng: &mut impl rand_core::RngCore) -> Decomposition {
    let terms = (0..r)
        .map(|_| {
            Rank1Term::new(
                shape
                    .dims()
                    .iter()
                    .map(|&n| {
                        (0..n)
                            .map(|_| rng::uniform_int(rng, -POINT_BOX, POINT_BOX) as f64)
                            .collect()
                    })
                    .collect(),
            )
        })
        .collect();
    Decomposition::new(shape.clone(), terms).expect("terms built from shape")
}

/// Exact Jacobian rank maximized over `trials` random integer points.
/// Deterministic given the seed: trial `i` uses the (seed, i) stream.
pub fn jacobian_generic_rank(
    shape: &Shape,
    r: usize,
    trials: usize,
    seed: u64,
) -> Result<JacobianReport, Error> {
    if r == 0 {
        return Err(Error::InvalidTermCount);
    }
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1"));
    }
    let rows = shape.total();
    let mut achieved = 0;
    for trial in 0..trials {
        let mut rng = rng::stream(seed, trial as u64);
        let point = random_integer_point(shape, r, &mut rng);
        let rank = exact_jacobian_rank(&point)?;
        if rank > achieved {
            achieved = rank;
        }
        if achieved == rows {
            break;
        }
    }
    Ok(JacobianReport {
        shape: shape.clone(),
        r,
        point_seed: seed,
        jac_rows: rows,
        jac_cols: jacobian_cols(shape, r),
        achieved_rank: achieved,
        full_row_rank: achieved == rows,
        trials,
    })
}

/// Dimension-count heuristic `ceil(prod dims / (sum dims - d + 1))`.
///
/// Used as a search start and as a diagnostic only: defective formats
/// exceed it, so it can under-predict the true generic rank.
pub fn expected_generic_rank(shape: &Shape) -> Result<usize, Error> {
    let d = shape.order();
    if d < 2 {
        return Err(Error::OrderTooSmall { order: d, required: 2 });
    }
    let denom = shape.dims().iter().sum::<usize>() - d + 1;
    Ok(shape.total().div_ceil(denom))
}

/// Smallest `r` whose Jacobian reaches full row rank at a random point:
/// the generic rank of the format. Returns the confirming report at that r.
///
/// Starts at the dimension-count heuristic, climbs while the test fails,
/// then descends to confirm minimality, so the returned `r` passes and
/// `r - 1` fails (when `r > 1`). The search is bounded: `r` equal to the
/// slice bound always succeeds.
pub fn generic_rank_with_trials(
    shape: &Shape,
    trials: usize,
    seed: u64,
) -> Result<(usize, JacobianReport), Error> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1"));
    }
    let test = |r: usize| {
        jacobian_generic_rank(shape, r, trials, rng::derive_seed(seed, r as u64))
            .expect("r >= 1 and trials >= 1")
    };
    let start = if shape.order() >= 2 {
        expected_generic_rank(shape).expect("order checked").max(1)
    } else {
        1
    };
    let mut r = start;
    let mut report = test(r);
    if report.full_row_rank {
        while r > 1 {
            let below = test(r - 1);
            if !below.full_row_rank {
                break;
            }
            r -= 1;
            report = below;
        }
    } else {
        loop {
            r += 1;
            debug_assert!(r <= shape.slice_bound(), "search must stop by the slice bound");
            report = test(r);
            if report.full_row_rank {
                break;
            }
        }
    }
    Ok((r, report))
}

/// [`generic_rank_with_trials`] at the default trial count, rank only.
pub fn generic_rank(shape: &Shape, seed: u64) -> usize {
    generic_rank_with_trials(shape, DEFAULT_TRIALS, seed)
        .expect("default trial count is valid")
        .0
}
