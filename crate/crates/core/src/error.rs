use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("register width mismatch: {left} vs {right} qubits")]
    WidthMismatch { left: usize, right: usize },

    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("{n_qubits} qubits exceeds the configured cap of {cap}")]
    WidthCapExceeded { n_qubits: usize, cap: usize },

    #[error("malformed bitstring {0:?}")]
    MalformedBitstring(String),

    #[error("operator is not Hermitian")]
    NonHermitian,

    #[error("matrix is not unitary (max deviation {0:e})")]
    NonUnitary(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("gate {gate} is not supported by {context}")]
    UnsupportedGate { gate: String, context: &'static str },

    #[error("coupling graph: {0}")]
    Graph(String),

    #[error("confusion matrix for qubit {qubit} is singular (|1 - p01 - p10| = {det:e})")]
    SingularConfusion { qubit: usize, det: f64 },

    #[error("extrapolation fit failed: {0}")]
    FitFailure(String),

    #[error("time grids do not match: {0}")]
    GridMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
