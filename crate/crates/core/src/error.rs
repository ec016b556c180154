use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the optimization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("evaluation budget exhausted ({limit} evaluations)")]
    BudgetExhausted { limit: usize },

    #[error("decision variable {index} = {value} outside [{lower}, {upper}]")]
    Domain {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("correlation matrix is ill-conditioned even with nugget {nugget:e}")]
    IllConditioned { nugget: f64 },

    #[error("population of {got} members cannot be truncated to {wanted}")]
    PopulationSize { got: usize, wanted: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
