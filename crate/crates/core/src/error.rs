use thiserror::Error;

/// Errors raised while building or evaluating channel instances and regions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{function} is not injective: with {fixed} fixed, inputs {first} and {second} both map to {image}")]
    NonInjective {
        function: String,
        fixed: String,
        first: usize,
        second: usize,
        image: usize,
    },
    #[error("row {row} of {kernel} sums to {sum}, not 1")]
    NonStochastic { kernel: String, row: usize, sum: String },
    #[error("table {table} is not total: {detail}")]
    IncompleteTable { table: String, detail: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable sets overlap on {0}")]
    OverlappingSets(String),
    #[error("index {index} out of range for {what}")]
    IndexOutOfRange { what: String, index: usize },
    #[error("invalid selection: {0}")]
    InvalidSelection(String),
    #[error("channel is not degenerate in the third pair: {0}")]
    NotDegenerate(String),
    #[error("invalid probability `{0}`")]
    InvalidProbability(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Validation collects every violation instead of stopping at the first one.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{} violation(s); first: {}", .0.len(), .0.first().map(|e| e.to_string()).unwrap_or_default())]
pub struct Violations(pub Vec<Error>);
