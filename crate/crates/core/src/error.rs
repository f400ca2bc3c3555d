use thiserror::Error;

pub type Result<T> = std::result::Result<T, GevreyError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GevreyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sigma must exceed 1 (got {0})")]
    SigmaNotAboveOne(f64),

    #[error("the zero multi-index has no decomposition")]
    ZeroMultiIndex,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("pole: reciprocal of zero at the base point")]
    Pole,

    #[error("derivative order {order} exceeds jet truncation {truncation}")]
    OrderExceedsTruncation { order: usize, truncation: usize },

    #[error("order limit exceeded: |alpha| = {order} > {limit} for d = {dim}")]
    OrderLimit { order: usize, limit: usize, dim: usize },

    #[error("base point mismatch: outer jet at {outer}, inner value {inner}")]
    BaseMismatch { outer: String, inner: String },

    #[error("exact arithmetic unavailable for {0}")]
    Inexact(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("cutoff transition band under-resolved: {cells:.2} cells < 8")]
    UnderResolved { cells: f64 },

    #[error("cone contains no frequency bins")]
    EmptyCone,

    #[error("profile too short: {0} usable orders")]
    ProfileTooShort(usize),

    #[error("characteristic point: principal symbol vanishes at x = {x:?}, xi = {xi:?}")]
    Characteristic { x: Vec<f64>, xi: Vec<f64> },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("malformed GRIDFIELD: {0}")]
    GridField(String),
}
