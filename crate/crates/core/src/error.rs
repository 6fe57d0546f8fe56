use thiserror::Error;

/// Errors raised by the walk, cocycle and lab layers.
#[derive(Debug, Error)]
pub enum QrwError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension budget exceeded: {needed} > max {limit}")]
    Budget { needed: usize, limit: usize },

    #[error("invalid step function: {0}")]
    StepFunction(String),

    #[error("invalid generator data: {0}")]
    InvalidData(String),

    #[error("truncation cap reached: tail bound {tail:.3e} still above {tol:.1e} at order {cap}")]
    TruncationCap { cap: usize, tail: f64, tol: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QrwError>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(QrwError::Dimension(msg.into()))
}
