use thiserror::Error;

/// Errors reported by the bound, capacity, and simulation APIs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("beta must be finite and nonnegative, got {0}")]
    InvalidBeta(f64),

    #[error("levels must be at least 2, got {0}")]
    InvalidLevels(u64),

    /// Requested payload outside the feasible interval `(0, log2 K]`.
    #[error("payload must lie in (0, {max:?}]")]
    InfeasiblePayload { payload: f64, max: f64 },

    #[error("alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),

    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    InvalidEpsilon(f64),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("rate list has length {got} but the chain has {expected} writes")]
    RateLengthMismatch { got: usize, expected: usize },

    #[error("write index {index} out of range 0..={writes}")]
    WriteIndexOutOfRange { index: usize, writes: usize },

    /// The brute-force oracle refuses instances beyond its enumeration budget.
    #[error(
        "brute-force oracle supports levels in {{2,3}}, writes in 1..=3 and \
         grid_steps in 1..=200; got levels={levels}, writes={writes}, grid_steps={grid_steps}"
    )]
    OracleTooLarge {
        levels: u64,
        writes: u64,
        grid_steps: u64,
    },

    #[error("invalid optimizer parameters: {0}")]
    InvalidOptimizerParams(String),

    #[error("message {message} out of range for {bins} bins")]
    MessageOutOfRange { message: u64, bins: u64 },

    #[error("block state inconsistent with stage: {0}")]
    InconsistentStage(String),

    /// The stage has no bins left; nothing can be recorded or decoded.
    #[error("stage is dead: bin count is {0}")]
    DeadStage(u64),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}
