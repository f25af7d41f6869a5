//! Nonnegative tensor rank toolkit for small dense tensors.
//!
//! The crate computes, bounds, and certifies nonnegative ranks and typical
//! nonnegative ranks:
//!
//! - [`tensor`]: dense tensors in a fixed row-major layout, rank-1 terms,
//!   CP evaluation, flattenings, and numeric matrix rank.
//! - [`generic`]: the generic rank of a tensor format, decided by exact
//!   integer rank computations on the CP-map Jacobian at random points.
//! - [`nonneg`]: lower and upper bounds on the nonnegative rank of a given
//!   tensor (flattenings, fooling sets, fiber decomposition, HALS search),
//!   combined into a [`nonneg::RankInterval`].
//! - [`witness`]: the congruence witness tensor with its certified
//!   maximal-rank ball, and generation/verification of typicality
//!   certificates for every feasible rank.
//! - [`census`]: seeded Monte Carlo rank census over random ensembles.
//!
//! The crate is `no_std` compatible (requires `alloc`); the companion CLI
//! crate carries all file formats and IO.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod census;
pub mod error;
pub mod exact;
pub mod generic;
pub mod nonneg;
pub mod rng;
pub mod tensor;
pub mod witness;

pub use error::Error;
pub use tensor::{DenseTensor, Decomposition, Rank1Term, Shape};
