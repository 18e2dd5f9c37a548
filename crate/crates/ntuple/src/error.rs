use std::path::PathBuf;

use thiserror::Error;

/// Exit codes of the command line.
pub mod exit {
    pub const OK: u8 = 0;
    pub const HYPOTHESIS_FAILURE: u8 = 2;
    pub const NO_CONVERGENCE: u8 = 3;
    pub const USAGE: u8 = 64;
    pub const PARSE: u8 = 65;
    pub const MISSING_FILE: u8 = 66;
    pub const BOUND: u8 = 69;
    pub const MISSING_ORACLE: u8 = 70;
    pub const IO: u8 = 74;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{}: file not found", .0.display())]
    MissingFile(PathBuf),
    #[error("{0}")]
    Bound(String),
    #[error("{0}")]
    MissingOracle(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Parse { .. } | CliError::Invalid(_) => exit::PARSE,
            CliError::MissingFile(_) => exit::MISSING_FILE,
            CliError::Bound(_) => exit::BOUND,
            CliError::MissingOracle(_) => exit::MISSING_ORACLE,
            CliError::Io { .. } => exit::IO,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl std::fmt::Display) -> Self {
        CliError::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

/// Reads a file, mapping a missing file to its own error.
pub fn read_file(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            CliError::MissingFile(path.to_path_buf())
        } else {
            CliError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

impl From<ntuple_core::hypotheses::HypothesisError> for CliError {
    fn from(e: ntuple_core::hypotheses::HypothesisError) -> Self {
        match e {
            ntuple_core::hypotheses::HypothesisError::BoundExceeded { .. } => CliError::Bound(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<ntuple_core::solver::SolveError> for CliError {
    fn from(e: ntuple_core::solver::SolveError) -> Self {
        use ntuple_core::solver::SolveError;
        match e {
            SolveError::BoundExceeded { .. } => CliError::Bound(e.to_string()),
            SolveError::Hypothesis(h) => h.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}
