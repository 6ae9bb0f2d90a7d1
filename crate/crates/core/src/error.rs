use thiserror::Error;

/// Errors raised by the word calculus, the site dynamics and the exact
/// probability layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("negative generator index at byte {pos}")]
    NegativeIndex { pos: usize },

    #[error("resource limit exceeded: {what} (limit {limit})")]
    ResourceLimit { what: &'static str, limit: usize },

    #[error("invalid partial shift: m = {m} exceeds n = {n}")]
    InvalidShift { m: u64, n: u64 },

    #[error("value outside the domain: {0}")]
    OutOfDomain(String),

    #[error("row {row} of the matrix is not stochastic: {reason}")]
    NotStochastic { row: usize, reason: String },

    #[error("weight vector is not stationary for the matrix (column {column})")]
    NotStationary { column: usize },

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("no strictly positive stationary vector exists")]
    NoPositiveStationary,

    #[error("inverse letter g{index}^{exponent} is not allowed in a monoid representation")]
    InverseInMonoid { index: u64, exponent: i64 },

    #[error("site {site} cannot be used with representation {rep}")]
    UnsupportedPairing { rep: String, site: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;
