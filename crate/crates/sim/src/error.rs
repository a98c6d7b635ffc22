use std::path::{Path, PathBuf};

use thiserror::Error;

use fedeploy_core::CoreError;
use fedeploy_mobility::MobilityError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),

    #[error("client {0} has no training data")]
    EmptyDataset(usize),

    #[error("no model updates to aggregate")]
    NoUpdates,

    #[error("model updates have inconsistent shapes")]
    ShapeMismatch,

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Mobility(#[from] MobilityError),

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

impl SimError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, source: csv::Error) -> Self {
        Self::Csv {
            path: path.to_path_buf(),
            source,
        }
    }
}
