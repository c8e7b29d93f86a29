//! Competitor registry, results database, ranking and on-disk persistence.

mod db;
mod files;
mod rank;
mod runner;

use thiserror::Error;

pub use db::{create_db, ResultsDatabase};
pub use files::{load_results, load_runners, save_results, save_runners, DataDir};
pub use rank::{column_diff, rank_results, RankedResult};
pub use runner::{Registry, Runner};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("duplicate runner id {0}")]
    DuplicateRunnerId(i64),
    #[error("duplicate RFID tag `{0}`")]
    DuplicateRfid(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("{path}:{line}: {message}")]
    Format { path: String, line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl StoreError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        StoreError::Io { path: path.display().to_string(), source }
    }
}
