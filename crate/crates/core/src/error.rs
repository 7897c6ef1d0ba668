use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max asymmetry {asymmetry:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not positive definite: min eigenvalue {min_eigenvalue:.6e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("variable index {index} out of range for dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("evaluation error: division by (near) zero in `{0}`")]
    DivisionByZero(String),

    #[error("unknown catalog metric `{0}`")]
    UnknownMetric(String),

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("parameter `{name}` = {value} outside its allowed range {range}")]
    ParameterOutOfRange { name: String, value: f64, range: String },

    #[error("point {radius:.4} lies outside the validity radius {limit:.4}")]
    OutsideDomain { radius: f64, limit: f64 },

    #[error("diagonal entry {index} is not real-valued (imaginary part {imag:.3e})")]
    NonRealDiagonal { index: usize, imag: f64 },

    #[error("frame mismatch: {0}")]
    FrameMismatch(String),

    #[error("degenerate direction: norm {0:.3e}")]
    DegenerateDirection(f64),

    #[error("not a PSD direction: {0}")]
    InvalidDirection(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("map is not holomorphic: component {0} contains a conjugated variable")]
    NotHolomorphic(usize),

    #[error("invalid input: {0}")]
    Invalid(String),
}
