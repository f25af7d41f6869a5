//! Dense tensors, rank-1 terms, and CP-map evaluation.
//!
//! The linear layout is row-major with the last index varying fastest.
//! Every consumer of flat value buffers (file IO, flattenings, fiber
//! extraction) relies on this one order. Indices are 0-based throughout the
//! library; conversion to the 1-based convention happens only at the IO
//! boundary.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;

/// Tensor format: the dimension tuple `(N_1, ..., N_d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    dims: Vec<usize>,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self, Error> {
        if dims.is_empty() {
            return Err(Error::EmptyShape);
        }
        if let Some(mode) = dims.iter().position(|&n| n == 0) {
            return Err(Error::ZeroDimension { mode });
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of modes `d`.
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// Total entry count, the product of all dimensions.
    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Mode used for fiber extraction: the last mode of maximal dimension.
    ///
    /// Inputs need not be sorted; picking a maximal mode makes
    /// [`Shape::slice_bound`] as small as possible.
    pub fn fiber_mode(&self) -> usize {
        let max = *self.dims.iter().max().expect("nonempty dims");
        self.dims.iter().rposition(|&n| n == max).expect("max exists")
    }

    /// Dimension of the fiber mode.
    pub fn fiber_dim(&self) -> usize {
        self.dims[self.fiber_mode()]
    }

    /// Product of all dimensions except the fiber mode.
    ///
    /// This caps the nonnegative rank of every tensor of this shape and is
    /// itself the maximal nonnegative rank.
    pub fn slice_bound(&self) -> usize {
        self.total() / self.fiber_dim()
    }

    /// Strides of the row-major layout: `linear = sum(index[m] * stride[m])`.
    pub fn strides(&self) -> Vec<usize> {
        let d = self.order();
        let mut s = vec![1usize; d];
        for m in (0..d.saturating_sub(1)).rev() {
            s[m] = s[m + 1] * self.dims[m + 1];
        }
        s
    }

    /// Row-major linear offset of a 0-based multi-index.
    pub fn linear_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.order());
        let mut lin = 0;
        for (m, (&i, &n)) in index.iter().zip(&self.dims).enumerate() {
            debug_assert!(i < n, "index {i} out of bounds in mode {m}");
            lin = lin * n + i;
        }
        lin
    }

    /// Inverse of [`Shape::linear_index`].
    pub fn multi_index(&self, mut lin: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.order()];
        for m in (0..self.order()).rev() {
            idx[m] = lin % self.dims[m];
            lin /= self.dims[m];
        }
        idx
    }

    /// All multi-indices in layout order (which is ascending lexicographic).
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.total()).map(move |lin| self.multi_index(lin))
    }
}

/// Advance a 0-based odometer over `dims` (last position fastest).
/// Returns false once the odometer wraps back to all zeros.
pub(crate) fn advance(index: &mut [usize], dims: &[usize]) -> bool {
    for m in (0..dims.len()).rev() {
        index[m] += 1;
        if index[m] < dims[m] {
            return true;
        }
        index[m] = 0;
    }
    false
}

/// Dense real tensor over a [`Shape`], stored as one flat buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Shape,
    values: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Shape, values: Vec<f64>) -> Result<Self, Error> {
        if values.len() != shape.total() {
            return Err(Error::ValueCountMismatch {
                expected: shape.total(),
                found: values.len(),
            });
        }
        Ok(Self { shape, values })
    }

    pub fn zeros(shape: Shape) -> Self {
        let n = shape.total();
        Self { shape, values: vec![0.0; n] }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.values[self.shape.linear_index(index)]
    }

    /// First strictly negative entry, if any. NaN entries count as negative
    /// so that nonnegative contexts reject them.
    pub fn first_negative(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v >= 0.0))
            .map(|(i, &v)| (i, v))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.first_negative().is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, &v| {
            let a = libm::fabs(v);
            if a > acc {
                a
            } else {
                acc
            }
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.values.iter().map(|&v| v * v).sum())
    }
}

/// One rank-1 term: a factor vector per mode; the tensor entry at
/// `(i_1, ..., i_d)` is the product of `factors[j][i_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Term {
    factors: Vec<Vec<f64>>,
}

impl Rank1Term {
    pub fn new(factors: Vec<Vec<f64>>) -> Self {
        Self { factors }
    }

    pub fn factors(&self) -> &[Vec<f64>] {
        &self.factors
    }

    pub fn factor(&self, mode: usize) -> &[f64] {
        &self.factors[mode]
    }

    pub fn conforms_to(&self, shape: &Shape) -> Result<(), Error> {
        if self.factors.len() != shape.order() {
            return Err(Error::FactorCountMismatch {
                expected: shape.order(),
                found: self.factors.len(),
            });
        }
        for (mode, (f, &n)) in self.factors.iter().zip(shape.dims()).enumerate() {
            if f.len() != n {
                return Err(Error::FactorLengthMismatch {
                    mode,
                    expected: n,
                    found: f.len(),
                });
            }
        }
        Ok(())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.factors.iter().flatten().all(|&v| v >= 0.0)
    }
}

/// An ordered list of rank-1 terms over a shape. The term count is the
/// nominal rank `r` of the decomposition and is never silently reduced.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    shape: Shape,
    terms: Vec<Rank1Term>,
}

impl Decomposition {
    pub fn new(shape: Shape, terms: Vec<Rank1Term>) -> Result<Self, Error> {
        for term in &terms {
            term.conforms_to(&shape)?;
        }
        Ok(Self { shape, terms })
    }

    pub fn empty(shape: Shape) -> Self {
        Self { shape, terms: Vec::new() }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn terms(&self) -> &[Rank1Term] {
        &self.terms
    }

    /// Term count `r`.
    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.terms.iter().all(Rank1Term::is_nonnegative)
    }
}

/// Outer product of one rank-1 term: entry `(i_1, ..., i_d)` is
/// the product over modes of `factors[j][i_j]`.
pub fn outer(term: &Rank1Term, shape: &Shape) -> Result<DenseTensor, Error> {
    term.conforms_to(shape)?;
    let mut out = DenseTensor::zeros(shape.clone());
    accumulate_outer(term, shape, out.values_mut());
    Ok(out)
}

fn accumulate_outer(term: &Rank1Term, shape: &Shape, acc: &mut [f64]) {
    let d = shape.order();
    let mut idx = vec![0usize; d];
    let mut lin = 0;
    loop {
        let mut p = 1.0;
        for (j, &i) in idx.iter().enumerate() {
            p *= term.factor(j)[i];
        }
        acc[lin] += p;
        lin += 1;
        if !advance(&mut idx, shape.dims()) {
            break;
        }
    }
}

/// Evaluate the CP map: the entrywise sum of the outer products of all
/// terms. The empty decomposition evaluates to the zero tensor.
pub fn eval_cp(dec: &Decomposition) -> DenseTensor {
    let mut out = DenseTensor::zeros(dec.shape().clone());
    for term in dec.terms() {
        accumulate_outer(term, dec.shape(), out.values_mut());
    }
    out
}

/// Euclidean (Frobenius) distance between two tensors of equal shape.
pub fn frobenius_distance(a: &DenseTensor, b: &DenseTensor) -> Result<f64, Error> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            left: a.shape().dims().to_vec(),
            right: b.shape().dims().to_vec(),
        });
    }
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum();
    Ok(libm::sqrt(sum))
}

/// Unfold a tensor into a matrix, grouping `row_modes` (0-based, strictly
/// increasing) as rows and the remaining modes as columns. Within each
/// group the multi-index runs in the same row-major order as the tensor
/// layout, so reshaping is a fixed bijection on entries.
pub fn flatten(t: &DenseTensor, row_modes: &[usize]) -> Result<DenseTensor, Error> {
    let d = t.shape().order();
    let valid = !row_modes.is_empty()
        && row_modes.len() < d
        && row_modes.windows(2).all(|w| w[0] < w[1])
        && row_modes.iter().all(|&m| m < d);
    if !valid {
        return Err(Error::InvalidRowModes);
    }
    let col_modes: Vec<usize> = (0..d).filter(|m| !row_modes.contains(m)).collect();
    let dims = t.shape().dims();
    let nrows: usize = row_modes.iter().map(|&m| dims[m]).product();
    let ncols: usize = col_modes.iter().map(|&m| dims[m]).product();

    let mut out = vec![0.0; nrows * ncols];
    let mut idx = vec![0usize; d];
    let mut lin = 0;
    loop {
        let row = row_modes.iter().fold(0, |acc, &m| acc * dims[m] + idx[m]);
        let col = col_modes.iter().fold(0, |acc, &m| acc * dims[m] + idx[m]);
        out[row * ncols + col] = t.values()[lin];
        lin += 1;
        if !advance(&mut idx, dims) {
            break;
        }
    }
    DenseTensor::new(Shape::new(vec![nrows, ncols])?, out)
}

/// Numeric rank of a matrix: the number of pivots of a complete-pivoting
/// Gaussian elimination whose magnitude exceeds `tol` times the largest
/// pivot. The zero matrix has rank 0.
pub fn matrix_rank(m: &DenseTensor, tol: f64) -> Result<usize, Error> {
    if m.shape().order() != 2 {
        return Err(Error::NotAMatrix { order: m.shape().order() });
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance);
    }
    let rows = m.shape().dims()[0];
    let cols = m.shape().dims()[1];
    let mut a = m.values().to_vec();

    let mut rank = 0;
    let mut first_pivot = 0.0;
    for k in 0..rows.min(cols) {
        let (mut pi, mut pj, mut pmax) = (k, k, 0.0);
        for i in k..rows {
            for j in k..cols {
                let v = libm::fabs(a[i * cols + j]);
                if v > pmax {
                    pmax = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if k == 0 {
            first_pivot = pmax;
        }
        if pmax == 0.0 || pmax <= tol * first_pivot {
            break;
        }
        if pi != k {
            for j in 0..cols {
                a.swap(pi * cols + j, k * cols + j);
            }
        }
        if pj != k {
            for i in 0..rows {
                a.swap(i * cols + pj, i * cols + k);
            }
        }
        rank += 1;
        let pivot = a[k * cols + k];
        for i in k + 1..rows {
            let f = a[i * cols + k] / pivot;
            a[i * cols + k] = 0.0;
            for j in k + 1..cols {
                a[i * cols + j] -= f * a[k * cols + j];
            }
        }
    }
    Ok(rank)
}
