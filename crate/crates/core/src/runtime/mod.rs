//! The timing agent: turns event lines into machine runs against the results
//! database, from batch files or live connections.

mod agent;
mod event;
pub mod server;

use thiserror::Error;

pub use agent::{AgentRuntime, BatchSummary, LogEntry, LoggedEvent, Outcome, SkipReason};
pub use event::{format_event_line, parse_event_line, CompetitorRef, EventMode, MalformedEvent, TimingEvent};
pub use server::{Server, ServerHandle};

use crate::store::StoreError;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("results table does not match the registry: {0}")]
    Mismatch(String),
}

impl RuntimeError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        RuntimeError::Io { path: path.display().to_string(), source }
    }
}
