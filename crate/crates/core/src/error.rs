use std::path::PathBuf;

use teamcite_stats::StatsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("paper `{id}` appears twice with conflicting fields (second copy on line {line})")]
    DuplicatePaper { id: String, line: usize },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no data: {0}")]
    NoData(String),

    #[error("undefined academic age: author `{author}` has no paper by {year}")]
    UndefinedAge { author: String, year: i32 },

    #[error("infeasible generator spec: {0}")]
    Infeasible(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl CoreError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
