//! Crate-wide error type.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use crate::generic::JacobianReport;

/// Errors reported by tensor construction, bound computation, and
/// certificate generation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A shape must have at least one mode.
    EmptyShape,
    /// Every mode dimension must be at least 1.
    ZeroDimension { mode: usize },
    /// Value buffer length does not match the shape's total size.
    ValueCountMismatch { expected: usize, found: usize },
    /// A rank-1 term has the wrong number of factor vectors.
    FactorCountMismatch { expected: usize, found: usize },
    /// A factor vector length does not match its mode dimension.
    FactorLengthMismatch { mode: usize, expected: usize, found: usize },
    /// Two tensors were expected to share a shape.
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },
    /// The operation requires an order-2 tensor.
    NotAMatrix { order: usize },
    /// Flattening row modes must be nonempty, strictly increasing, in range,
    /// and a proper subset of the modes.
    InvalidRowModes,
    /// Tolerances must be nonnegative finite numbers.
    InvalidTolerance,
    /// Negative entry at the given linear offset where a nonnegative tensor
    /// is required.
    NegativeEntry { offset: usize, value: f64 },
    /// Non-finite entry where real data is required.
    NonFiniteEntry { offset: usize },
    /// The operation requires a higher tensor order.
    OrderTooSmall { order: usize, required: usize },
    /// Term counts must be at least 1 here.
    InvalidTermCount,
    /// Invalid solver or experiment configuration.
    InvalidConfig(&'static str),
    /// The requested rank lies outside the feasible certificate range
    /// `[generic rank, slice bound]`. When the failure came from the
    /// Jacobian test, the report carries the achieved rank and its cap.
    RankOutOfRange {
        r: usize,
        max: usize,
        jacobian: Option<Box<JacobianReport>>,
    },
    /// Certificate generation gave up after its retry budget.
    RetriesExhausted { attempts: usize },
    /// The tensor lies outside the certified ball, so no maximal-rank
    /// certificate applies. This is "no certificate", not "rank is smaller".
    OutsideBall { distance: f64, radius: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyShape => write!(f, "shape must have at least one mode"),
            Error::ZeroDimension { mode } => {
                write!(f, "mode {mode} has dimension 0; all dimensions must be >= 1")
            }
            Error::ValueCountMismatch { expected, found } => {
                write!(f, "expected {expected} values for this shape, found {found}")
            }
            Error::FactorCountMismatch { expected, found } => {
                write!(f, "term has {found} factor vectors, shape has {expected} modes")
            }
            Error::FactorLengthMismatch { mode, expected, found } => {
                write!(f, "factor for mode {mode} has length {found}, expected {expected}")
            }
            Error::ShapeMismatch { left, right } => {
                write!(f, "shape mismatch: {left:?} vs {right:?}")
            }
            Error::NotAMatrix { order } => {
                write!(f, "operation requires an order-2 tensor, got order {order}")
            }
            Error::InvalidRowModes => write!(
                f,
                "row modes must be a nonempty, strictly increasing, proper subset of the modes"
            ),
            Error::InvalidTolerance => write!(f, "tolerance must be a nonnegative finite number"),
            Error::NegativeEntry { offset, value } => {
                write!(f, "negative entry {value} at offset {offset}; nonnegative tensor required")
            }
            Error::NonFiniteEntry { offset } => {
                write!(f, "non-finite entry at offset {offset}")
            }
            Error::OrderTooSmall { order, required } => {
                write!(f, "tensor order {order} too small; need at least {required}")
            }
            Error::InvalidTermCount => write!(f, "term count must be at least 1"),
            Error::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            Error::RankOutOfRange { r, max, jacobian } => {
                write!(f, "rank {r} outside the feasible range [generic rank, {max}]")?;
                if let Some(rep) = jacobian {
                    write!(
                        f,
                        " (jacobian rank {} of {} rows, cap {})",
                        rep.achieved_rank,
                        rep.jac_rows,
                        rep.rank_cap()
                    )?;
                }
                Ok(())
            }
            Error::RetriesExhausted { attempts } => {
                write!(f, "gave up after {attempts} attempts")
            }
            Error::OutsideBall { distance, radius } => {
                write!(f, "distance {distance} >= ball radius {radius}; no certificate")
            }
        }
    }
}

impl core::error::Error for Error {}
