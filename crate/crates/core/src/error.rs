use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Cholesky factorization hit a non-positive pivot.
    #[error("matrix is not positive definite (pivot {pivot})")]
    Singular { pivot: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A scenario parameter failed validation.
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("no Hadamard matrix of order {0} is available (Sylvester orders 1, 2, 4, 8, ...)")]
    UnsupportedOrder(usize),

    /// The requested target cannot be met (rate ceiling, infeasible GP).
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("no convergence after {iterations} iterations: {context}")]
    NonConvergence { iterations: usize, context: String },

    /// Quantity undefined for the given configuration (e.g. a zero reference rate).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 1 configuration or I/O, 2 numerical failure,
    /// 3 infeasible target.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig { .. }
            | Error::UnsupportedOrder(_)
            | Error::DimensionMismatch(_)
            | Error::Io(_)
            | Error::Csv(_) => 1,
            Error::Domain(_) | Error::Singular { .. } | Error::NonConvergence { .. } | Error::Degenerate(_) => 2,
            Error::Infeasible(_) => 3,
        }
    }

    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
