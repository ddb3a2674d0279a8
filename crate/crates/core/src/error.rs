use std::path::PathBuf;

use crate::flightdyn::RigidBodyState;

/// Errors raised anywhere in the simulation, injection and analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("command error: {0}")]
    Command(String),

    #[error("simulation diverged at t={time:.3} s: {reason}")]
    Diverged {
        time: f64,
        reason: String,
        last_valid: Box<RigidBodyState>,
    },

    #[error("trim failed after {iterations} iterations (residual {residual:.3e})")]
    TrimFailure { iterations: usize, residual: f64 },

    #[error("parse error in {source_name} at line {line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("invalid fault spec #{index} ({label}): {reason}")]
    FaultSpec {
        index: usize,
        label: String,
        reason: String,
    },

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
