use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid process spec: {0}")]
    InvalidSpec(String),

    #[error("numerical failure in {context}: partial estimate {partial:e}, estimated error {abs_err:e}")]
    Numerical { context: String, partial: f64, abs_err: f64 },

    #[error(
        "characteristic function not integrable at t={t}: |Phi| = {decay:e} at cutoff {cutoff:e}; \
         use a closed-form density or restrict the analysis to larger t"
    )]
    NonIntegrable { t: f64, cutoff: f64, decay: f64 },

    #[error("{operation} is not supported for the {family} family")]
    Unsupported { family: String, operation: String },

    #[error("tail mass {tail_mass:e} outside the grid exceeds {limit:e}; enlarge the x-range or grid size")]
    ExcessiveTail { tail_mass: f64, limit: f64 },

    #[error("quantization bins are misaligned with the density grid: {0}")]
    Misaligned(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
