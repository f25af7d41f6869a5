//! Exact integer linear algebra for rank certificates.
//!
//! Rank decisions made here are discrete certificates, so everything runs
//! over arbitrary-precision integers with fraction-free (Bareiss)
//! elimination. No tolerance appears anywhere in this module.
//!
//! Floating-point inputs enter through [`Dyadic`]: every finite `f64` is an
//! exact dyadic rational `mantissa * 2^exp`, so a matrix of f64-derived
//! values can be scaled by one common power of two into an integer matrix
//! with the same rank.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Zero;

/// An exact dyadic rational `mantissa * 2^exp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    pub mantissa: BigInt,
    pub exp: i64,
}

impl Dyadic {
    pub fn one() -> Self {
        Self { mantissa: BigInt::from(1), exp: 0 }
    }

    /// Exact decomposition of a finite f64. Panics on NaN or infinity;
    /// callers validate finiteness first.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "dyadic decomposition requires a finite value");
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let biased = ((bits >> 52) & 0x7FF) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac as i64, -1074)
        } else {
            ((frac | (1u64 << 52)) as i64, biased - 1075)
        };
        Self { mantissa: BigInt::from(sign * m), exp: e }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            mantissa: &self.mantissa * &other.mantissa,
            exp: self.exp + other.exp,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }
}

/// Scale a dyadic matrix by the common power of two that clears every
/// denominator, yielding an integer matrix of the same rank.
pub fn dyadic_to_integers(entries: &[Dyadic]) -> Vec<BigInt> {
    let min_exp = entries
        .iter()
        .filter(|d| !d.is_zero())
        .map(|d| d.exp)
        .min()
        .unwrap_or(0);
    entries
        .iter()
        .map(|d| {
            if d.is_zero() {
                BigInt::zero()
            } else {
                &d.mantissa << (d.exp - min_exp) as usize
            }
        })
        .collect()
}

/// Rank of an integer matrix by fraction-free Gaussian elimination with
/// full pivoting. Exact: the result is the true rank over the rationals.
pub fn integer_matrix_rank(rows: usize, cols: usize, mut a: Vec<BigInt>) -> usize {
    assert_eq!(a.len(), rows * cols);
    let steps = rows.min(cols);
    let mut prev = BigInt::from(1);
    let mut rank = 0;

    for k in 0..steps {
        // Smallest-magnitude nonzero pivot in the trailing block keeps the
        // Bareiss growth down.
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                let e = &a[i * cols + j];
                if e.is_zero() {
                    continue;
                }
                match pivot {
                    None => pivot = Some((i, j)),
                    Some((pi, pj)) => {
                        if e.magnitude() < a[pi * cols + pj].magnitude() {
                            pivot = Some((i, j));
                        }
                    }
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
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

        // Bareiss update: every entry stays an exact minor of the input, and
        // the division by the previous pivot is exact.
        for i in k + 1..rows {
            for j in k + 1..cols {
                let num = &a[k * cols + k] * &a[i * cols + j] - &a[i * cols + k] * &a[k * cols + j];
                a[i * cols + j] = num / &prev;
            }
            a[i * cols + k] = BigInt::zero();
        }
        prev = a[k * cols + k].clone();
    }
    rank
}

/// Rank of a matrix of dyadic rationals (exact).
pub fn dyadic_matrix_rank(rows: usize, cols: usize, entries: &[Dyadic]) -> usize {
    integer_matrix_rank(rows, cols, dyadic_to_integers(entries))
}
