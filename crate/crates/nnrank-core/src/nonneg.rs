//! Nonnegative rank bounds.
//!
//! Lower bounds come from flattening ranks (matrix rank of any unfolding
//! lower-bounds the real rank, hence the nonnegative rank), from fooling
//! sets for matrices, and optionally from a maximal-rank ball certificate.
//! Upper bounds come from the fiber decomposition (one rank-1 term per
//! nonzero fiber) and from a multi-restart HALS factorization search.
//! Exact nonnegative rank is NP-hard in general, so the interval claims
//! exactness only when a lower bound meets an upper bound; NTF
//! non-convergence is evidence, never proof.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::rng;
use crate::tensor::{
    advance, flatten, matrix_rank, Decomposition, DenseTensor, Rank1Term, Shape,
};
use crate::witness::{certify_max_rank, MaxRankCertificate};

/// Relative tolerance for numeric matrix-rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Guard against division by zero in relative residuals.
const TINY: f64 = 1e-300;

/// Where a bound in a [`RankInterval`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSource {
    /// The zero tensor has rank 0.
    Zero,
    /// Matrix rank of a flattening.
    Flattening,
    /// Fooling-set size (matrices only).
    FoolingSet,
    /// For matrices of rank at most 2, nonnegative rank equals rank.
    RankLe2Rule,
    /// Count of nonzero fibers in the canonical decomposition.
    Slice,
    /// A converged nonnegative factorization at this term count.
    NtfFit,
    /// A maximal-rank ball certificate supplied by the caller.
    Certificate,
}

impl BoundSource {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundSource::Zero => "zero",
            BoundSource::Flattening => "flattening",
            BoundSource::FoolingSet => "fooling-set",
            BoundSource::RankLe2Rule => "rank-le-2-rule",
            BoundSource::Slice => "slice",
            BoundSource::NtfFit => "ntf-fit",
            BoundSource::Certificate => "certificate",
        }
    }
}

/// Certified bounds `[lower, upper]` on the nonnegative rank, with the
/// provenance of each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankInterval {
    pub lower: usize,
    pub upper: usize,
    pub lower_provenance: BoundSource,
    pub upper_provenance: BoundSource,
    pub exact: bool,
}

/// Configuration of the HALS factorization search.
#[derive(Debug, Clone, PartialEq)]
pub struct NtfConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Relative residual below which a run counts as converged.
    pub residual_tol: f64,
    pub seed: u64,
    /// Initial factor entries are uniform in `(0, init_scale)`; `None`
    /// uses the maximum entry of the target tensor.
    pub init_scale: Option<f64>,
}

impl Default for NtfConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iters: 2000,
            residual_tol: 1e-8,
            seed: 0,
            init_scale: None,
        }
    }
}

impl NtfConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    fn validate(&self) -> Result<(), Error> {
        if self.restarts < 1 {
            return Err(Error::InvalidConfig("restarts must be at least 1"));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidConfig("max_iters must be at least 1"));
        }
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) {
            return Err(Error::InvalidConfig("residual_tol must be positive and finite"));
        }
        if let Some(s) = self.init_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidConfig("init_scale must be positive and finite"));
            }
        }
        Ok(())
    }
}

/// Outcome of a factorization search at a fixed term count.
#[derive(Debug, Clone, PartialEq)]
pub struct NtfResult {
    pub decomposition: Decomposition,
    /// Frobenius distance of the reconstruction from the target, divided by
    /// the target norm (guarded against zero).
    pub relative_residual: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

fn basis_vector(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Decompose a nonnegative tensor into one rank-1 term per nonzero fiber:
/// basis vectors in every mode except the fiber mode, the fiber itself
/// there. Reconstruction is exact (terms have disjoint support), and the
/// term count is at most the slice bound.
pub fn canonical_decomposition(t: &DenseTensor) -> Result<Decomposition, Error> {
    if let Some((offset, value)) = t.first_negative() {
        return Err(Error::NegativeEntry { offset, value });
    }
    let shape = t.shape();
    let d = shape.order();
    let dims = shape.dims();
    let f = shape.fiber_mode();
    let nf = dims[f];
    let fiber_stride = shape.strides()[f];

    let outer_modes: Vec<usize> = (0..d).filter(|&m| m != f).collect();
    let outer_dims: Vec<usize> = outer_modes.iter().map(|&m| dims[m]).collect();

    let mut terms = Vec::new();
    let mut oidx = vec![0usize; outer_modes.len()];
    loop {
        let mut full = vec![0usize; d];
        for (pos, &m) in outer_modes.iter().enumerate() {
            full[m] = oidx[pos];
        }
        let base = shape.linear_index(&full);
        let fiber: Vec<f64> = (0..nf).map(|l| t.values()[base + l * fiber_stride]).collect();
        if fiber.iter().any(|&v| v != 0.0) {
            let factors: Vec<Vec<f64>> = (0..d)
                .map(|m| {
                    if m == f {
                        fiber.clone()
                    } else {
                        basis_vector(dims[m], full[m])
                    }
                })
                .collect();
            terms.push(Rank1Term::new(factors));
        }
        if !advance(&mut oidx, &outer_dims) {
            break;
        }
    }
    Decomposition::new(shape.clone(), terms)
}

/// Largest matrix rank over all single-mode flattenings (plus the three
/// 2-vs-2 splits when d = 4, which can exceed the single-mode bounds).
/// Lower-bounds the real rank and therefore the nonnegative rank.
///
/// Order-1 tensors are treated as n-by-1 matrices: 1 when nonzero.
pub fn flattening_rank_lower_bound(t: &DenseTensor, tol: f64) -> usize {
    assert!(tol >= 0.0 && tol.is_finite(), "tolerance must be a nonnegative finite number");
    let d = t.shape().order();
    if d == 1 {
        return usize::from(!t.is_zero());
    }
    let mut best = 0;
    for j in 0..d {
        let m = flatten(t, &[j]).expect("single mode is a valid row set for d >= 2");
        best = best.max(matrix_rank(&m, tol).expect("flattening is a matrix"));
    }
    if d == 4 {
        for pair in [[0usize, 1], [0, 2], [0, 3]] {
            let m = flatten(t, &pair).expect("2-subset is valid for d = 4");
            best = best.max(matrix_rank(&m, tol).expect("flattening is a matrix"));
        }
    }
    best
}

/// Size of the largest found set of support positions whose pairwise
/// "cross" products vanish: for distinct (i,j), (k,l) in the set,
/// `m[i,l] * m[k,j] = 0`. Any such set lower-bounds the nonnegative rank.
///
/// The search is exact (branch and bound over rows) when `min(rows, cols)`
/// is at most 6 and greedy beyond that; either way the returned value is a
/// valid lower bound.
pub fn fooling_set_lower_bound(m: &DenseTensor) -> Result<usize, Error> {
    if m.shape().order() != 2 {
        return Err(Error::NotAMatrix { order: m.shape().order() });
    }
    if let Some((offset, value)) = m.first_negative() {
        return Err(Error::NegativeEntry { offset, value });
    }
    let rows = m.shape().dims()[0];
    let cols = m.shape().dims()[1];
    let vals = m.values();

    // Work with rows as the smaller side; the condition is symmetric under
    // transposition.
    let (nr, nc, a) = if rows <= cols {
        (rows, cols, vals.to_vec())
    } else {
        let mut tr = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                tr[j * rows + i] = vals[i * cols + j];
            }
        }
        (cols, rows, tr)
    };

    let positive = |i: usize, j: usize| a[i * nc + j] > 0.0;
    let compatible = |(i1, j1): (usize, usize), (i2, j2): (usize, usize)| {
        a[i1 * nc + j2] == 0.0 || a[i2 * nc + j1] == 0.0
    };

    // Members of a fooling set occupy distinct rows and columns, so the
    // exact search branches over rows.
    if nr <= 6 {
        fn dfs(
            row: usize,
            nr: usize,
            nc: usize,
            positive: &dyn Fn(usize, usize) -> bool,
            compatible: &dyn Fn((usize, usize), (usize, usize)) -> bool,
            chosen: &mut Vec<(usize, usize)>,
            best: &mut usize,
        ) {
            if chosen.len() > *best {
                *best = chosen.len();
            }
            if row == nr || chosen.len() + (nr - row) <= *best {
                return;
            }
            for j in 0..nc {
                if positive(row, j) && chosen.iter().all(|&p| compatible(p, (row, j))) {
                    chosen.push((row, j));
                    dfs(row + 1, nr, nc, positive, compatible, chosen, best);
                    chosen.pop();
                }
            }
            dfs(row + 1, nr, nc, positive, compatible, chosen, best);
        }
        let mut best = 0;
        dfs(0, nr, nc, &positive, &compatible, &mut Vec::new(), &mut best);
        Ok(best)
    } else {
        let mut chosen: Vec<(usize, usize)> = Vec::new();
        for i in 0..nr {
            for j in 0..nc {
                if positive(i, j) && chosen.iter().all(|&p| compatible(p, (i, j))) {
                    chosen.push((i, j));
                    break;
                }
            }
        }
        Ok(chosen.len())
    }
}

/// Factor layout for the solver: `factors[mode][term]` is a vector of the
/// mode's dimension.
type Factors = Vec<Vec<Vec<f64>>>;

fn reconstruct(shape: &Shape, factors: &Factors, r: usize) -> Vec<f64> {
    let d = shape.order();
    let dims = shape.dims();
    let strides = shape.strides();
    let total = shape.total();
    let mut out = vec![0.0; total];
    for (lin, slot) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for k in 0..r {
            let mut w = 1.0;
            for m in 0..d {
                w *= factors[m][k][(lin / strides[m]) % dims[m]];
            }
            s += w;
        }
        *slot = s;
    }
    out
}

fn residual_norm(t: &DenseTensor, factors: &Factors, r: usize) -> f64 {
    let recon = reconstruct(t.shape(), factors, r);
    let sum: f64 = recon
        .iter()
        .zip(t.values())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum();
    libm::sqrt(sum)
}

/// Extrapolate past the sweep step `old -> new` by `beta`, clamped at zero.
fn extrapolate_clamped(old: &Factors, new: &Factors, beta: f64) -> Factors {
    old.iter()
        .zip(new)
        .map(|(om, nm)| {
            om.iter()
                .zip(nm)
                .map(|(ok, nk)| {
                    ok.iter()
                        .zip(nk)
                        .map(|(&o, &n)| {
                            let v = n + beta * (n - o);
                            if v > 0.0 {
                                v
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Doubling line search along the last sweep step. Candidates are kept only
/// when they strictly decrease the residual, so the per-sweep objective
/// stays nonincreasing; this breaks the slow crawl HALS falls into when the
/// target's rank-1 terms are nearly collinear.
fn line_search(
    t: &DenseTensor,
    before: &Factors,
    factors: &mut Factors,
    r: usize,
    res: f64,
) -> f64 {
    let mut best = res;
    let mut beta = 1.0;
    while beta < 1e12 {
        let cand = extrapolate_clamped(before, factors, beta);
        let cres = residual_norm(t, &cand, r);
        if cres < best {
            *factors = cand;
            best = cres;
            beta *= 2.0;
        } else {
            break;
        }
    }
    best
}

/// One HALS sweep over every mode: for each mode and term, the factor
/// vector gets its closed-form nonnegative least-squares update (clamped at
/// zero), which never increases the objective.
fn hals_sweep(t: &DenseTensor, factors: &mut Factors, r: usize) {
    let shape = t.shape();
    let d = shape.order();
    let dims = shape.dims();
    let strides = shape.strides();
    let total = shape.total();

    for j in 0..d {
        // Gram of the Khatri-Rao factor: Hadamard product of the per-mode
        // Gram matrices over all modes except j.
        let mut g = vec![1.0; r * r];
        for m in 0..d {
            if m == j {
                continue;
            }
            for k in 0..r {
                for k2 in 0..r {
                    let dot: f64 = factors[m][k]
                        .iter()
                        .zip(&factors[m][k2])
                        .map(|(a, b)| a * b)
                        .sum();
                    g[k * r + k2] *= dot;
                }
            }
        }

        // P = mode-j unfolding of t times the Khatri-Rao factor.
        let nj = dims[j];
        let mut p = vec![0.0; nj * r];
        for lin in 0..total {
            let tv = t.values()[lin];
            if tv == 0.0 {
                continue;
            }
            let ij = (lin / strides[j]) % nj;
            for k in 0..r {
                let mut w = 1.0;
                for m in 0..d {
                    if m != j {
                        w *= factors[m][k][(lin / strides[m]) % dims[m]];
                    }
                }
                p[ij * r + k] += tv * w;
            }
        }

        for k in 0..r {
            let gkk = g[k * r + k];
            if gkk <= TINY {
                // Dead component: some other factor is zero, so this term
                // contributes nothing whatever we set here.
                continue;
            }
            for i in 0..nj {
                let mut s = 0.0;
                for k2 in 0..r {
                    s += factors[j][k2][i] * g[k2 * r + k];
                }
                let v = factors[j][k][i] + (p[i * r + k] - s) / gkk;
                factors[j][k][i] = if v > 0.0 { v } else { 0.0 };
            }
        }
    }
}

/// Fit `r` nonnegative rank-1 terms to a nonnegative tensor by
/// multi-restart HALS.
///
/// Restarts run in index order with seeds derived from `(cfg.seed,
/// restart)`; the first converged restart is returned, otherwise the run
/// with the best residual. Non-convergence is reported through
/// `converged = false`, never as an error. Deterministic given the config.
pub fn ntf_fit(t: &DenseTensor, r: usize, cfg: &NtfConfig) -> Result<NtfResult, Error> {
    cfg.validate()?;
    if r == 0 {
        return Err(Error::InvalidTermCount);
    }
    if let Some((offset, value)) = t.first_negative() {
        return Err(Error::NegativeEntry { offset, value });
    }
    let shape = t.shape();
    let d = shape.order();
    let dims = shape.dims();
    let norm = t.frobenius_norm();
    let denom = if norm > TINY { norm } else { TINY };
    let scale = cfg.init_scale.unwrap_or_else(|| t.max_abs());

    let mut best: Option<NtfResult> = None;
    for restart in 0..cfg.restarts {
        let mut rng = rng::stream(cfg.seed, restart as u64);
        let mut factors: Factors = (0..d)
            .map(|j| {
                (0..r)
                    .map(|_| (0..dims[j]).map(|_| rng::uniform01(&mut rng) * scale).collect())
                    .collect()
            })
            .collect();

        let mut last_obj = f64::INFINITY;
        let mut rel = residual_norm(t, &factors, r) / denom;
        let mut iters = 0;
        let mut converged = rel < cfg.residual_tol;
        while !converged && iters < cfg.max_iters {
            let before = factors.clone();
            hals_sweep(t, &mut factors, r);
            iters += 1;
            let mut res = residual_norm(t, &factors, r);
            res = line_search(t, &before, &mut factors, r, res);
            let obj = res * res;
            debug_assert!(
                obj <= last_obj * (1.0 + 1e-9) + TINY,
                "HALS objective increased: {obj} after {last_obj}"
            );
            last_obj = obj;
            rel = res / denom;
            converged = rel < cfg.residual_tol;
        }

        let terms: Vec<Rank1Term> = (0..r)
            .map(|k| Rank1Term::new((0..d).map(|m| factors[m][k].clone()).collect()))
            .collect();
        let result = NtfResult {
            decomposition: Decomposition::new(shape.clone(), terms)?,
            relative_residual: rel,
            iterations_used: iters,
            converged,
        };
        if converged {
            return Ok(result);
        }
        let better = match &best {
            None => true,
            Some(b) => result.relative_residual < b.relative_residual,
        };
        if better {
            best = Some(result);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Certified interval on the nonnegative rank of `t`.
///
/// See [`nnrank_interval_with_certificate`]; this variant supplies no
/// external certificate.
pub fn nnrank_interval(t: &DenseTensor, cfg: &NtfConfig) -> Result<RankInterval, Error> {
    nnrank_interval_with_certificate(t, cfg, None)
}

/// Certified interval on the nonnegative rank of `t`, with an optional
/// maximal-rank ball certificate as an extra lower-bound source.
///
/// Lower bound: the best of the flattening bound, the fooling-set bound
/// (matrices), and the certificate's rank (re-verified here). Upper bound:
/// the nonzero-fiber count, improved by the smallest term count at which
/// the factorization search converges, scanned in ascending order. For
/// matrices of rank at most 2 the classical identity "nonnegative rank
/// equals rank" gives an exact answer directly. Decisions are invariant
/// under positive scaling of `t`.
pub fn nnrank_interval_with_certificate(
    t: &DenseTensor,
    cfg: &NtfConfig,
    cert: Option<&MaxRankCertificate>,
) -> Result<RankInterval, Error> {
    cfg.validate()?;
    if let Some((offset, value)) = t.first_negative() {
        return Err(Error::NegativeEntry { offset, value });
    }
    if t.is_zero() {
        return Ok(RankInterval {
            lower: 0,
            upper: 0,
            lower_provenance: BoundSource::Zero,
            upper_provenance: BoundSource::Zero,
            exact: true,
        });
    }
    let shape = t.shape();
    let d = shape.order();

    let mut lower = (flattening_rank_lower_bound(t, DEFAULT_RANK_TOL), BoundSource::Flattening);
    if d == 2 {
        let fool = fooling_set_lower_bound(t)?;
        if fool > lower.0 {
            lower = (fool, BoundSource::FoolingSet);
        }
    }
    if let Some(c) = cert {
        if &c.shape != shape || c.tensor.values() != t.values() {
            return Err(Error::InvalidConfig("certificate does not match the tensor"));
        }
        // Never trust the supplied fields: re-check the ball membership.
        let recheck = certify_max_rank(t)
            .map_err(|_| Error::InvalidConfig("supplied certificate does not verify"))?;
        if recheck.certified_rank > lower.0 {
            lower = (recheck.certified_rank, BoundSource::Certificate);
        }
    }

    if d == 2 {
        let mr = matrix_rank(t, DEFAULT_RANK_TOL)?;
        if mr <= 2 {
            return Ok(RankInterval {
                lower: mr,
                upper: mr,
                lower_provenance: BoundSource::RankLe2Rule,
                upper_provenance: BoundSource::RankLe2Rule,
                exact: true,
            });
        }
    }

    let fibers = canonical_decomposition(t)?.rank();
    let mut upper = (fibers, BoundSource::Slice);
    for r in lower.0.max(1)..=fibers {
        let res = ntf_fit(t, r, cfg)?;
        if res.converged {
            upper = (r, BoundSource::NtfFit);
            break;
        }
    }

    debug_assert!(lower.0 <= upper.0, "bounds crossed: {} > {}", lower.0, upper.0);
    debug_assert!(upper.0 <= shape.slice_bound());
    Ok(RankInterval {
        lower: lower.0,
        upper: upper.0,
        lower_provenance: lower.1,
        upper_provenance: upper.1,
        exact: lower.0 == upper.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{eval_cp, frobenius_distance, outer};
    use crate::witness::witness_tensor;

    fn shape(dims: &[usize]) -> Shape {
        Shape::new(dims.to_vec()).unwrap()
    }

    fn rank_gap_matrix() -> DenseTensor {
        // Real rank 3, nonnegative rank 4.
        DenseTensor::new(
            shape(&[4, 4]),
            vec![
                1.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 1.0, //
                1.0, 0.0, 0.0, 1.0, //
                0.0, 1.0, 1.0, 0.0,
            ],
        )
        .unwrap()
    }

    #[test]
    fn canonical_decomposition_all_ones() {
        let s = shape(&[2, 2, 2]);
        let t = DenseTensor::new(s, vec![1.0; 8]).unwrap();
        let dec = canonical_decomposition(&t).unwrap();
        assert_eq!(dec.rank(), 4);
        assert_eq!(eval_cp(&dec), t);
    }

    #[test]
    fn canonical_decomposition_zero_and_negative() {
        let s = shape(&[2, 3]);
        let dec = canonical_decomposition(&DenseTensor::zeros(s.clone())).unwrap();
        assert_eq!(dec.rank(), 0);
        let t = DenseTensor::new(s, vec![0.0, 0.0, 0.0, 0.0, -1.0, 0.0]).unwrap();
        assert!(matches!(
            canonical_decomposition(&t),
            Err(Error::NegativeEntry { offset: 4, .. })
        ));
    }

    #[test]
    fn canonical_decomposition_skips_zero_fibers() {
        let s = shape(&[2, 2, 2]);
        let mut vals = vec![0.0; 8];
        vals[s.linear_index(&[0, 1, 0])] = 2.0;
        vals[s.linear_index(&[0, 1, 1])] = 3.0;
        vals[s.linear_index(&[1, 0, 1])] = 5.0;
        let t = DenseTensor::new(s, vals).unwrap();
        let dec = canonical_decomposition(&t).unwrap();
        assert_eq!(dec.rank(), 2);
        assert_eq!(eval_cp(&dec), t);
    }

    #[test]
    fn canonical_decomposition_rank_gap_matrix() {
        let m = rank_gap_matrix();
        let dec = canonical_decomposition(&m).unwrap();
        assert_eq!(dec.rank(), 4);
        assert_eq!(eval_cp(&dec), m);
    }

    #[test]
    fn canonical_decomposition_reconstructs_random_tensors() {
        let mut rng = rng::stream(31, 0);
        for dims in [&[2usize][..], &[3, 2], &[2, 2, 2], &[2, 3, 4], &[2, 2, 2, 2]] {
            let s = shape(dims);
            let vals: Vec<f64> = (0..s.total()).map(|_| rng::uniform01(&mut rng)).collect();
            let t = DenseTensor::new(s.clone(), vals).unwrap();
            let dec = canonical_decomposition(&t).unwrap();
            assert!(dec.rank() <= s.slice_bound());
            assert_eq!(eval_cp(&dec), t, "exact reconstruction for {dims:?}");
        }
    }

    #[test]
    fn flattening_bound_cases() {
        assert_eq!(flattening_rank_lower_bound(&rank_gap_matrix(), DEFAULT_RANK_TOL), 3);

        let s = shape(&[2, 3, 2]);
        let t = outer(
            &Rank1Term::new(vec![vec![1.0, 2.0], vec![1.0, 1.0, 3.0], vec![3.0, 1.0]]),
            &s,
        )
        .unwrap();
        assert_eq!(flattening_rank_lower_bound(&t, DEFAULT_RANK_TOL), 1);

        let ball = witness_tensor(&shape(&[2, 2, 2]));
        assert_eq!(flattening_rank_lower_bound(&ball.center, DEFAULT_RANK_TOL), 2);
    }

    #[test]
    fn flattening_bound_uses_pair_splits_for_order_four() {
        // t = 1 exactly when (i1,i2) == (i3,i4): the (0,1)|(2,3) unfolding is
        // the 4x4 identity, while every single-mode unfolding is 2x8 with
        // rank at most 2.
        let s = shape(&[2, 2, 2, 2]);
        let mut vals = vec![0.0; 16];
        for idx in s.indices() {
            if idx[0] == idx[2] && idx[1] == idx[3] {
                vals[s.linear_index(&idx)] = 1.0;
            }
        }
        let t = DenseTensor::new(s, vals).unwrap();
        let single: usize = (0..4)
            .map(|j| matrix_rank(&flatten(&t, &[j]).unwrap(), 1e-9).unwrap())
            .max()
            .unwrap();
        assert_eq!(single, 2);
        assert_eq!(flattening_rank_lower_bound(&t, DEFAULT_RANK_TOL), 4);
    }

    #[test]
    fn fooling_set_cases() {
        let eye = DenseTensor::new(
            shape(&[3, 3]),
            vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        assert_eq!(fooling_set_lower_bound(&eye).unwrap(), 3);

        let ones = DenseTensor::new(shape(&[2, 2]), vec![1.0; 4]).unwrap();
        assert_eq!(fooling_set_lower_bound(&ones).unwrap(), 1);

        assert_eq!(fooling_set_lower_bound(&rank_gap_matrix()).unwrap(), 4);

        let t3 = DenseTensor::zeros(shape(&[2, 2, 2]));
        assert!(matches!(fooling_set_lower_bound(&t3), Err(Error::NotAMatrix { .. })));
    }

    #[test]
    fn fooling_set_greedy_path_is_a_valid_bound() {
        // 7x7 identity takes the greedy path (min side > 6).
        let n = 7;
        let mut vals = vec![0.0; n * n];
        for i in 0..n {
            vals[i * n + i] = 1.0;
        }
        let eye = DenseTensor::new(shape(&[n, n]), vals).unwrap();
        assert_eq!(fooling_set_lower_bound(&eye).unwrap(), n);
    }

    #[test]
    fn ntf_recovers_single_term() {
        let s = shape(&[2, 3, 2]);
        let mut rng = rng::stream(5, 0);
        let term = Rank1Term::new(
            s.dims()
                .iter()
                .map(|&n| (0..n).map(|_| rng::uniform01(&mut rng) + 0.1).collect())
                .collect(),
        );
        let t = outer(&term, &s).unwrap();
        let res = ntf_fit(&t, 1, &NtfConfig::with_seed(3)).unwrap();
        assert!(res.converged);
        assert!(res.relative_residual < 1e-10, "residual {}", res.relative_residual);
        assert!(res.decomposition.is_nonnegative());
    }

    #[test]
    fn ntf_fits_witness_center_at_four_terms() {
        let ball = witness_tensor(&shape(&[2, 2, 2]));
        let res = ntf_fit(&ball.center, 4, &NtfConfig::with_seed(1)).unwrap();
        assert!(res.converged, "residual {}", res.relative_residual);
    }

    #[test]
    fn ntf_cannot_fit_witness_center_at_three_terms() {
        // Every tensor in the witness ball has nonnegative rank 4, so the
        // best rank-3 fit stays at least the ball radius away.
        let ball = witness_tensor(&shape(&[2, 2, 2]));
        let res = ntf_fit(&ball.center, 3, &NtfConfig::with_seed(1)).unwrap();
        assert!(!res.converged);
        assert!(res.relative_residual > 1e-3, "residual {}", res.relative_residual);
    }

    #[test]
    fn ntf_zero_tensor_converges_trivially() {
        let t = DenseTensor::zeros(shape(&[2, 2]));
        let res = ntf_fit(&t, 1, &NtfConfig::with_seed(0)).unwrap();
        assert!(res.converged);
        assert_eq!(res.relative_residual, 0.0);
    }

    #[test]
    fn ntf_result_residual_is_recomputable() {
        let s = shape(&[2, 2, 2]);
        let mut rng = rng::stream(8, 0);
        let vals: Vec<f64> = (0..8).map(|_| rng::uniform01(&mut rng)).collect();
        let t = DenseTensor::new(s, vals).unwrap();
        let res = ntf_fit(&t, 2, &NtfConfig::with_seed(4)).unwrap();
        let recon = eval_cp(&res.decomposition);
        let rel = frobenius_distance(&recon, &t).unwrap() / t.frobenius_norm();
        assert!((rel - res.relative_residual).abs() <= 1e-12);
    }

    #[test]
    fn interval_zero_tensor() {
        let t = DenseTensor::zeros(shape(&[2, 2, 2]));
        let iv = nnrank_interval(&t, &NtfConfig::default()).unwrap();
        assert_eq!((iv.lower, iv.upper), (0, 0));
        assert!(iv.exact);
        assert_eq!(iv.lower_provenance, BoundSource::Zero);
    }

    #[test]
    fn interval_rank_gap_matrix_is_exactly_four() {
        let iv = nnrank_interval(&rank_gap_matrix(), &NtfConfig::with_seed(2)).unwrap();
        assert_eq!((iv.lower, iv.upper), (4, 4));
        assert!(iv.exact);
        assert_eq!(iv.lower_provenance, BoundSource::FoolingSet);
        assert_eq!(iv.upper_provenance, BoundSource::NtfFit);
    }

    #[test]
    fn interval_rank2_matrix_uses_the_rule() {
        let m = DenseTensor::new(shape(&[2, 2]), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let iv = nnrank_interval(&m, &NtfConfig::default()).unwrap();
        assert_eq!((iv.lower, iv.upper), (2, 2));
        assert!(iv.exact);
        assert_eq!(iv.lower_provenance, BoundSource::RankLe2Rule);
        assert_eq!(iv.upper_provenance, BoundSource::RankLe2Rule);
    }

    #[test]
    fn interval_accepts_matching_certificate() {
        let ball = witness_tensor(&shape(&[2, 2, 2]));
        let cert = certify_max_rank(&ball.center).unwrap();
        let iv = nnrank_interval_with_certificate(
            &ball.center,
            &NtfConfig::with_seed(1),
            Some(&cert),
        )
        .unwrap();
        assert_eq!((iv.lower, iv.upper), (4, 4));
        assert!(iv.exact);
        assert_eq!(iv.lower_provenance, BoundSource::Certificate);
    }

    #[test]
    fn interval_rejects_mismatched_certificate() {
        let ball = witness_tensor(&shape(&[2, 2, 2]));
        let cert = certify_max_rank(&ball.center).unwrap();
        let other = DenseTensor::new(shape(&[2, 2, 2]), vec![0.5; 8]).unwrap();
        assert!(matches!(
            nnrank_interval_with_certificate(&other, &NtfConfig::default(), Some(&cert)),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn interval_scale_invariance() {
        let mut rng = rng::stream(77, 0);
        let s = shape(&[2, 2, 2]);
        for _ in 0..3 {
            let vals: Vec<f64> = (0..8).map(|_| rng::uniform01(&mut rng)).collect();
            let t = DenseTensor::new(s.clone(), vals.clone()).unwrap();
            let scaled =
                DenseTensor::new(s.clone(), vals.iter().map(|v| v * 37.5).collect()).unwrap();
            let cfg = NtfConfig::with_seed(9);
            let a = nnrank_interval(&t, &cfg).unwrap();
            let b = nnrank_interval(&scaled, &cfg).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn interval_sandwich_on_random_tensors() {
        let mut rng = rng::stream(13, 1);
        for dims in [&[2usize, 2][..], &[2, 2, 2], &[3, 2], &[2, 2, 3]] {
            let s = shape(dims);
            let vals: Vec<f64> = (0..s.total()).map(|_| rng::uniform01(&mut rng)).collect();
            let t = DenseTensor::new(s.clone(), vals).unwrap();
            let iv = nnrank_interval(&t, &NtfConfig::with_seed(6)).unwrap();
            assert!(iv.lower <= iv.upper);
            assert!(iv.upper <= s.slice_bound());
            let fool_ok = if dims.len() == 2 {
                fooling_set_lower_bound(&t).unwrap() <= iv.upper
            } else {
                true
            };
            assert!(fool_ok);
        }
    }
}
