//! Toolkit for multilevel write-once memories: closed-form bounds on the
//! payload/coding-efficiency tradeoff, achievable-rate (capacity) optimization
//! over monotone level chains, and a Monte Carlo simulator for a multi-stage
//! random-binning rewriting scheme.
//!
//! A memory block holds `N` cells with `K` threshold-voltage levels each.
//! Programming only lowers a cell's level; an erase resets every cell to
//! `K - 1`. Between two erases the block records a sequence of messages, and
//! the interesting quantities are
//!
//! * payload `p` — bits recorded per cell per write round, and
//! * coding efficiency `c` — bits recorded per cell per erase cycle, scaled
//!   by `alpha / K` (information per unit of voltage-level budget).
//!
//! The [`bound_math`] module evaluates the exponential-family level-drop
//! distribution whose cost/rate curve yields an upper bound on efficiency at
//! a given payload. The [`capacity`] module maximizes the total achievable
//! rate over monotone level chains, with a brute-force grid oracle for small
//! instances. The [`womsim`] module simulates the two-state rewriting scheme
//! with shared-seed random binning and compares the measured payload and
//! efficiency against the closed-form bounds. The [`cli`] module backs the
//! `womkit` binary.

pub mod bound_math;
pub mod capacity;
pub mod cli;
mod error;
pub mod womsim;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
