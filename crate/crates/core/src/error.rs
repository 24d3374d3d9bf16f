use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input contains a non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("degenerate range: min and max are both {value}")]
    DegenerateRange { value: f64 },

    #[error("series too short: need more than {needed} observations, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("partition would be empty ({train} training rows, {test} testing rows)")]
    EmptyPartition { train: usize, test: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    Empty,

    #[error("actual value at index {index} is zero; MAPE is undefined")]
    ZeroActual { index: usize },

    #[error("loss differential has zero variance; DM statistic is undefined")]
    DegenerateVariance,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid search space: {0}")]
    InvalidSpace(String),

    #[error("objective returned {value} at {position:?}")]
    ObjectiveNonFinite { position: Vec<f64>, value: f64 },

    #[error("algorithm {0} is not implemented")]
    UnsupportedAlgorithm(String),

    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),

    #[error("{step}: {source}")]
    Step {
        step: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps the error with the pipeline step that produced it.
    pub fn at(self, step: &'static str) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }

    /// Innermost error, with step annotations peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}
