use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix not positive definite")]
    NotPositiveDefinite,

    #[error("leading block not positive definite")]
    LeadingBlockNotPd,

    #[error("state not positive definite")]
    StateNotPd,

    #[error("matrix is not symmetric: entry ({row}, {col}) differs from its transpose")]
    NotSymmetric { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty truncation interval ({lo}, {hi})")]
    EmptyInterval { lo: f64, hi: f64 },

    #[error("unsupported dimension p = {p} for design {design}: {reason}")]
    UnsupportedDesign {
        design: &'static str,
        p: usize,
        reason: &'static str,
    },

    #[error("empty draw stream")]
    EmptyStream,

    #[error("column {column}, stage {stage}: {source}")]
    Column {
        column: usize,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_column(self, column: usize, stage: &'static str) -> Error {
        Error::Column {
            column,
            stage,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
