use thiserror::Error;

/// Errors produced by the geometry, spectral, flow and harness layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular offset: height {height} reaches the focal distance {focal}")]
    SingularOffset { height: f64, focal: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("graph breakdown at s = {s}: {reason}")]
    GraphBreakdown { s: f64, reason: String },

    #[error("step rejected: {0}")]
    StepRejected(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("invalid config: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
