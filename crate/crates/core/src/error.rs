use std::path::PathBuf;

/// Errors produced by the library.
///
/// Variants are grouped by how the CLI maps them to exit codes:
/// data/ingestion problems exit with 2, numerical failures with 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate response: both classes (0 and 1) must be present")]
    DegenerateResponse,

    #[error("no penalized coefficients: all penalty factors are zero")]
    NoPenalizedCoefficients,

    #[error("no valid initial subset: every elemental fit failed")]
    NoValidInitialSubset,

    #[error("insufficient class size: class {class} would keep {got} rows, need at least {needed}")]
    InsufficientClassSize {
        class: u8,
        needed: usize,
        got: usize,
    },

    #[error("constant column {name:?} is unpenalized and cannot be standardized")]
    ConstantUnpenalizedColumn { name: String },

    #[error("duplicate {what} {name:?}")]
    Duplicate { what: &'static str, name: String },

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("{path}: row {row}, column {col}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        col: String,
        message: String,
    },

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("invalid data: {0}")]
    Invalid(String),

    #[error("empty selection: {0}")]
    EmptySelection(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit code the CLI uses for this error (2 = data error, 3 = numerical failure).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateResponse
            | Error::NoValidInitialSubset
            | Error::InsufficientClassSize { .. }
            | Error::ConstantUnpenalizedColumn { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
