use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::instance::{FieldViolation, ServiceIdx};

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid instance ({} violations): {}", .0.len(), join(.0))]
    InvalidInstance(Vec<FieldViolation>),
    #[error("{0} cannot be placed in any caregiver route")]
    Unplaceable(ServiceIdx),
    #[error("solution does not cover every service exactly once: {0}")]
    Coverage(String),
    #[error("instance too large for exhaustive search: {what} is {actual}, limit {limit}")]
    TooLarge { what: &'static str, actual: usize, limit: usize },
    #[error("external solver failed: {0}")]
    Solver(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    /// Short machine-readable tag for error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::InvalidInstance(_) => "invalid_instance",
            Error::Unplaceable(_) => "infeasible",
            Error::Coverage(_) => "coverage",
            Error::TooLarge { .. } => "too_large",
            Error::Solver(_) => "solver",
            Error::Parse(_) => "parse",
            Error::Usage(_) => "usage",
        }
    }
}

fn join(v: &[FieldViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
