use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid code distance {0}: must be odd and at least 3")]
    InvalidDistance(usize),

    #[error("invalid number of syndrome-extraction cycles {0}: must be at least 1")]
    InvalidRounds(usize),

    #[error("physical error rate {0} outside the supported range [0, 0.5)")]
    InvalidErrorRate(f64),

    #[error("fault at {location} flips {count} {pauli} detectors (at most 2 allowed)")]
    FaultTooWide {
        location: String,
        pauli: &'static str,
        count: usize,
    },

    #[error("fault at {0} flips the logical observable without flipping any detector")]
    UndetectableLogical(String),

    #[error("invalid schedule parameters: {0}")]
    InvalidSchedule(String),

    #[error("inner decoder failed: {0}")]
    Decode(#[from] DecodeError),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("invalid fit input: {0}")]
    Fit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Failure modes of a single inner-decoder invocation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("odd defect parity with no reachable open boundary")]
    Unannihilable,

    #[error("defect {0} is not a real vertex of the window")]
    BadDefect(usize),

    #[error("input is not a forest: {0}")]
    NotAForest(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
