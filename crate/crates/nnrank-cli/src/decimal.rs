//! Exact decimal encoding of f64 values.
//!
//! Every finite f64 is a dyadic rational, so it has a finite decimal
//! expansion: `m * 2^-k = m * 5^k * 10^-k`. Certificate files store numeric
//! fields as these exact strings; parsing one back recovers the identical
//! f64 bit pattern, so serialized certificates verify exactly like
//! in-memory ones.

use anyhow::{bail, Context, Result};
use num_bigint::BigInt;
use num_traits::{pow, Signed};

use nnrank_core::exact::Dyadic;

/// Exact decimal representation of a finite f64.
pub fn exact_decimal(x: f64) -> String {
    assert!(x.is_finite(), "exact decimal needs a finite value");
    if x == 0.0 {
        return "0".to_string();
    }
    let d = Dyadic::from_f64(x);
    let negative = d.mantissa.is_negative();
    let m = d.mantissa.abs();
    let body = if d.exp >= 0 {
        (m << d.exp as usize).to_string()
    } else {
        let k = (-d.exp) as usize;
        // m * 2^-k = (m * 5^k) shifted k decimal places.
        let digits = (m * pow(BigInt::from(5), k)).to_string();
        let digits = if digits.len() <= k {
            format!("{}{}", "0".repeat(k + 1 - digits.len()), digits)
        } else {
            digits
        };
        let point = digits.len() - k;
        let mut s = format!("{}.{}", &digits[..point], &digits[point..]);
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
        s
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Parse a decimal string to f64 (correctly rounded, so exact decimals of
/// f64 values round-trip bit-for-bit). Rejects non-finite results.
pub fn parse_decimal(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .with_context(|| format!("invalid decimal number {s:?}"))?;
    if !v.is_finite() {
        bail!("non-finite numeric value {s:?}");
    }
    Ok(v)
}
