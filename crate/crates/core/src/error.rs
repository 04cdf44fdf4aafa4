use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("{requested} qubits exceeds the dense limit of {limit}")]
    TooManyQubits { requested: usize, limit: usize },

    #[error("invalid Pauli label {label:?}: {reason}")]
    Label { label: String, reason: String },

    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("ambiguous syndrome table: {first} and {second} share a syndrome")]
    Ambiguous { first: String, second: String },

    #[error("state has no support in the projected space (c = {0:e})")]
    NoSupport(f64),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("canonical diagonalization discarded every direction")]
    EmptySubspace,

    #[error("logical state preparation failed: {0}")]
    Preparation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_qubits(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
