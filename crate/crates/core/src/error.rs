use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Physical-model failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("valve angle {0}° outside [0, 90]")]
    AngleOutOfRange(f64),
    #[error("non-positive gas volume {0} m³")]
    NonPositiveVolume(f64),
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("non-finite controller input: {0}")]
    NonFinite(&'static str),
    #[error("non-positive time step {0}")]
    BadTimeStep(f64),
    #[error("invalid controller parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("{0}")]
    Invalid(String),
    #[error("infeasible throttle request: {0}")]
    InfeasibleThrottle(String),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("degenerate fit: {0}")]
    Degenerate(String),
    #[error("sample rejected: {0}")]
    Rejected(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Model(_) => "model",
            Error::Control(_) => "control",
            Error::Config(_) => "validation",
            Error::Fit(_) => "fit",
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
        }
    }
}
