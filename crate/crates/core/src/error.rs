use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::objective::ConstraintFamily;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("selection has {found} genes, instance has {expected} clients")]
    LengthMismatch { expected: usize, found: usize },

    #[error("instance has no feasible selection: {family} ({detail})")]
    Infeasible {
        family: ConstraintFamily,
        detail: String,
    },

    #[error("population is empty")]
    EmptyPopulation,

    #[error("archive candidate is infeasible")]
    InfeasibleCandidate,

    #[error("exhaustive enumeration refused for n = {n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CoreError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
