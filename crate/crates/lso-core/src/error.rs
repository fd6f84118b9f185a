use thiserror::Error;

/// Errors raised by builders, verifiers and query structures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate at point {point}")]
    NonFinite { point: usize },

    #[error("empty input")]
    Empty,

    #[error("invalid norm exponent {0} (need p >= 1)")]
    InvalidNorm(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range (size {size})")]
    OutOfRange { index: usize, size: usize },

    #[error("graph is disconnected: vertex {vertex} unreachable")]
    Disconnected { vertex: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("not a tree: {0}")]
    NotATree(String),

    #[error("all points coincide")]
    Degenerate,

    #[error("invalid tree decomposition: {axiom}")]
    InvalidDecomposition { axiom: String },

    #[error("invalid shortest path decomposition at level {level}: {reason}")]
    InvalidSpd { level: usize, reason: String },

    #[error("invalid ordering {ordering}: {reason}")]
    InvalidOrdering { ordering: usize, reason: String },

    #[error("ordering {ordering} is not sorted by distance to its root")]
    UnsortedRooted { ordering: usize },

    #[error("ordering kind mismatch: expected {expected}, got {got}")]
    KindMismatch { expected: String, got: String },

    #[error("point {point} is not covered by any center at scale {scale}")]
    CoverageExhausted { scale: i64, point: usize },

    #[error("retry cap reached: {0}")]
    RetryCap(String),

    #[error("padding failed: point {point} best padding radius {radius}")]
    PaddingFailed { point: usize, radius: f64 },

    #[error("cluster {cluster} at level {level} has diameter {diameter} above {bound}")]
    DiameterViolation {
        level: usize,
        cluster: usize,
        diameter: f64,
        bound: f64,
    },

    #[error("too many faults: {got} > {budget}")]
    TooManyFaults { got: usize, budget: usize },

    #[error("query endpoint {0} is faulty")]
    FaultyEndpoint(usize),

    #[error("the query point shares no ordering with the stored set")]
    NoSharedOrdering,

    #[error("no path found: {0}")]
    NoPath(String),

    #[error("distance estimate inconsistent with stored clusters for pair ({u}, {v})")]
    EstimatorFault { u: usize, v: usize },

    #[error("strategy out of scope: {0}")]
    OutOfScope(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
