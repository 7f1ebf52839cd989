//! Simulation library for multimode Hong-Ou-Mandel devices (MHDs).
//!
//! An MHD is an `m`-mode passive linear-optical network `D_m(theta)` that
//! reproduces the two-photon interference statistics of a single beam
//! splitter for *every* pair of input modes, which makes it a natural match
//! for two-photon scattershot sources. This crate builds the generators and
//! network matrices, evaluates exact two-photon output distributions through
//! matrix permanents, models the scattershot source and its architecture
//! trade-offs, and decomposes the network into two-level beam splitters.
//!
//! Everything is plain `f64`; results that are exact in infinite precision
//! are compared against tolerances instead of being rounded.

pub mod cli;
pub mod decompose;
pub mod error;
pub mod generator;
pub mod matrix;
pub mod network;
pub mod scattershot;
pub mod selftest;
pub mod stats;

pub use error::{Error, Result};

/// Default tolerance for identities that hold exactly in real arithmetic.
pub const TOL_ALGEBRAIC: f64 = 1e-12;

/// Default tolerance for quantities obtained through root finding.
pub const TOL_ROOT: f64 = 1e-9;
