use thiserror::Error;

/// Errors raised by the geometry, catalog, orbit and analysis layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Dilation outside `(1, ∞)`: parabolic or super-repelling points, or no expansion at all.
    #[error("out of scope: {reason} (log dilation estimate {log_dilation})")]
    OutOfScope { reason: String, log_dilation: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
