use thiserror::Error;

/// Errors produced by the estimators and algorithms in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input")]
    EmptyInput,

    #[error("divergent integral: {0}")]
    Divergent(String),

    /// The autocorrelation of the density has a cusp at zero lag, so its
    /// second derivative there is not defined.
    #[error("autocorrelation has a cusp at zero lag (phi'(0) != 0) for {0}")]
    Cusp(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
