use thiserror::Error;

/// Errors raised by matrix validation, generator construction and the
/// estimators built on top of them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("state is not full rank (min eigenvalue {0:e})")]
    NotFullRank(f64),

    #[error("matrix is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("support of rho is not contained in the support of sigma")]
    SupportViolation,

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("generator is not primitive: {0}")]
    NotPrimitive(String),

    #[error("sigma is not a fixed point (residual {0:e})")]
    NotFixedPoint(f64),

    #[error("generator is not reversible with respect to its fixed point")]
    NotReversible,

    #[error("resource guard exceeded: {0}")]
    ResourceGuard(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
