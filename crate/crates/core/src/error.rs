use thiserror::Error;

/// Errors produced by the model, coder and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the documented domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative or adaptive numeric routine did not reach its tolerance.
    #[error("numeric error: {what} (achieved tolerance {achieved:e})")]
    Numeric { what: String, achieved: f64 },

    /// Input that is well-typed but carries no usable information
    /// (all-equal samples, zero rates, single-point ranges).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A bin probability fell below 1e-300, so -log2 is not representable.
    #[error("probability underflow at symbol {symbol}")]
    Underflow { symbol: i64 },

    /// d/dbeta of the CDF is evaluated too close to the ln|y| singularity.
    #[error("singular point: |y| = {0:e} <= 1e-6")]
    Singularity(f64),

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    /// Bitstream or LUT file that fails structural checks.
    #[error("corrupt data: {0}")]
    Corruption(String),

    /// Two RD curves whose quality ranges do not overlap enough to integrate.
    #[error("insufficient overlap: {0}")]
    InsufficientOverlap(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
