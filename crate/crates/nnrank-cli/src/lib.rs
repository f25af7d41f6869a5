//! CLI companion to `nnrank-core`: file formats and command dispatch.

pub mod app;
pub mod decimal;
pub mod formats;
