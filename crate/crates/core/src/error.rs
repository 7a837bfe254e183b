use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An integer index is out of range.
    #[error("{what}: index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    /// Operand shapes do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A documented precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The iterative eigensolver exhausted its iteration budget.
    #[error("eigensolver did not converge: {0}")]
    NonConvergence(String),

    /// The coupling chain carries no usable sign structure (e.g. `v0 = 0`).
    #[error("degenerate coupling chain: {0}")]
    DegenerateChain(String),

    /// A construction-time numerical consistency check failed.
    #[error("numerical consistency check failed: {0}")]
    NumericalCheck(String),

    /// File output failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
