use thiserror::Error;

/// Errors raised by qfc-core operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QfcError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("label collision: `{0}` appears more than once")]
    LabelCollision(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("labels overlap: {0}")]
    LabelOverlap(String),

    #[error("not a permutation of the state's labels: {0}")]
    NotAPermutation(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("dimension budget exceeded: {what} has dimension {dim} > cap {cap}")]
    DimensionBudget { what: String, dim: usize, cap: usize },

    #[error("singular input: {0}")]
    Singular(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QfcError>;
