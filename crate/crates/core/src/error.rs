use thiserror::Error;

/// Errors produced by the simulator and the protocol harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid length: {0}")]
    InvalidLength(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("invalid owner set: {0}")]
    InvalidOwners(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("aggregated vector is already shuffled")]
    AlreadyShuffled,

    #[error("{what} of {requested} qubits exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("qubit index collision: {0}")]
    QubitCollision(String),

    #[error("state is not normalized (norm^2 = {0})")]
    Unnormalized(f64),

    #[error("missing message from {from} to {to} in phase {phase}")]
    MissingMessage {
        from: String,
        to: String,
        phase: u8,
    },

    #[error("invalid config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
