//! Deterministic seeded randomness.
//!
//! Every randomized operation in the crate derives child streams from a
//! caller-supplied seed plus a logical tag (trial index, restart index,
//! sample index), so results depend only on the seed and the logical
//! structure of the computation, never on scheduling or call order.

use rand_core::{RngCore, SeedableRng};

pub use rand_chacha::ChaCha8Rng;

/// Mix a base seed with a stream tag (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A fresh generator for the given (seed, tag) stream.
pub fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag))
}

/// Uniform in `[0, 1)` with 53-bit resolution.
pub fn uniform01(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `[lo, hi]`, both ends inclusive.
pub fn uniform_int(rng: &mut impl RngCore, lo: i64, hi: i64) -> i64 {
    debug_assert!(lo <= hi);
    let span = (hi - lo) as u64 + 1;
    lo + ((rng.next_u64() as u128 * span as u128) >> 64) as i64
}

/// Sample `|N(0, sigma)|` (half-normal) via Box-Muller.
pub fn half_normal(rng: &mut impl RngCore, sigma: f64) -> f64 {
    let u1 = loop {
        let u = uniform01(rng);
        if u > 0.0 {
            break u;
        }
    };
    let u2 = uniform01(rng);
    let z = libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2);
    sigma * if z < 0.0 { -z } else { z }
}
