use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the command-line front end. Each variant carries a
/// stable code that is printed as `error[E0xx]` and a matching exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("row {row}, column `{column}`: {message}")]
    Parse {
        /// 1-based data row; 0 refers to the header.
        row: usize,
        column: String,
        message: String,
    },
    #[error("row {row}: date {current} does not come after {previous}")]
    NonMonotonicDates {
        row: usize,
        previous: String,
        current: String,
    },
    #[error("row {row}: close {value} is not a positive price")]
    NonPositivePrice { row: usize, value: f64 },
    #[error("{0}")]
    Algorithm(boasvr::Error),
    #[error("{0}")]
    Pipeline(boasvr::Error),
    #[error("{failed} of {total} algorithms failed; see results.json")]
    PartialFailure { failed: usize, total: usize },
    #[error("cannot write {}: {message}", path.display())]
    Output { path: PathBuf, message: String },
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "E001",
            CliError::Config(_) => "E002",
            CliError::Parse { .. } => "E003",
            CliError::NonMonotonicDates { .. } => "E004",
            CliError::NonPositivePrice { .. } => "E005",
            CliError::Algorithm(_) => "E006",
            CliError::Pipeline(_) => "E007",
            CliError::PartialFailure { .. } => "E008",
            CliError::Output { .. } => "E009",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 3,
            CliError::Config(_) => 4,
            CliError::Parse { .. } | CliError::NonMonotonicDates { .. } | CliError::NonPositivePrice { .. } => 5,
            CliError::Algorithm(_) => 6,
            CliError::Pipeline(_) => 7,
            CliError::PartialFailure { .. } => 8,
            CliError::Output { .. } => 9,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<boasvr::Error> for CliError {
    fn from(err: boasvr::Error) -> Self {
        match err.root() {
            boasvr::Error::UnsupportedAlgorithm(_) | boasvr::Error::UnknownAlgorithm(_) => {
                CliError::Algorithm(err)
            }
            _ => CliError::Pipeline(err),
        }
    }
}
