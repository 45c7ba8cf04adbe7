use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed text input; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A binomial coefficient or simplex index does not fit in 64 bits.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Vertex tuple violates the strictly-decreasing precondition.
    #[error("invalid simplex: {0}")]
    InvalidSimplex(String),

    /// Combinatorial index out of range for the requested dimension.
    #[error("invalid index: {0}")]
    InvalidIndex(String),

    /// Operation not defined for this input variant.
    #[error("{0}")]
    Unsupported(String),

    /// Transshipment network cannot carry a feasible flow.
    #[error("infeasible network: {0}")]
    Infeasible(String),

    /// Parameter outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
