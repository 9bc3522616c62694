use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is not a power of two in [2, 4096]")]
    BadDimension(usize),
    #[error("tensor product of dimension {0} exceeds the 4096 limit")]
    DimensionOverflow(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("partial trace keep-set is empty")]
    EmptyKeepSet,
    #[error("qubit index {index} out of range for {qubits} qubits")]
    QubitOutOfRange { index: usize, qubits: usize },
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("invalid qubit state: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("operator is not Hermitian")]
    NotHermitian,
    #[error("{0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
