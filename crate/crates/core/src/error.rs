use thiserror::Error;

/// A malformed text input, located by 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { line, column, message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("phase cap {requested} exceeds hard limit {limit}")]
    PhaseCap { requested: u32, limit: u32 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("tiling search exceeded {0} nodes")]
    SearchOverflow(u64),
    #[error("no program fits the data")]
    NoHypotheses,
    #[error("step ratio undefined: an inverter found no witness")]
    RatioUndefined,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
