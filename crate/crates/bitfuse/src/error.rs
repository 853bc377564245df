//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A topology matrix is malformed; names the offending topology index.
    #[error("topology {index}: {reason}")]
    InvalidTopology { index: usize, reason: String },

    /// A Markov chain matrix or distribution vector fails its invariants.
    #[error("invalid Markov chain: {0}")]
    InvalidChain(String),

    /// The chain has no unique stationary limit (reducible or periodic).
    #[error("chain has no unique stationary distribution: {0}; fix the transition matrix before requesting limits")]
    NotErgodic(String),

    /// A linear solver or iteration failed to reach the required residual.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Mismatched dimensions between two inputs.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Invalid configuration value (positivity, symmetry, ranges).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An operation refused to run because a required inequality fails.
    #[error("refused: violated condition {inequality}")]
    Refused { inequality: String },

    /// The estimate diverged to NaN/infinity.
    #[error("non-finite estimate at sensor {sensor}, step {k}")]
    NonFiniteEstimate { sensor: usize, k: usize },

    /// Config file parse failure.
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable process exit code contract: 1 for validation/assumption
    /// failures, 2 for I/O and parse failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Io(_) => 2,
            _ => 1,
        }
    }
}
