//! Approximate gradient coding under a heterogeneous (slow/active) straggler model.
//!
//! The crate is organised bottom-up:
//!
//! - [`coding`] builds fractional (FRC) and cyclic (CRC) repetition encoding matrices.
//! - [`stragglers`] draws worker classes and per-iteration straggler realizations.
//! - [`shuffling`] permutes the worker-to-column assignment every iteration.
//! - [`decoding`] computes the optimal least-squares decoding error and combining vector.
//! - [`analysis`] holds the closed-form expected errors, cycle-class combinatorics and
//!   the brute-force / Monte-Carlo oracles used to check them.
//! - [`training`] runs gradient descent end to end on top of all of the above.
//!
//! Indices are 0-based throughout the API. Human-facing output (CLI tables, CSV)
//! uses the same 0-based positions unless stated otherwise.

pub mod analysis;
pub mod coding;
pub mod decoding;
mod error;
pub mod rng;
pub mod shuffling;
pub mod stragglers;
pub mod training;
pub mod validate;

pub use error::{Error, Result};
