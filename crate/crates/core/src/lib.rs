//! EasyTime: a small language for driving race-timing agents.
//!
//! A program declares the agents that deliver timing events, the per-competitor
//! database columns, and what happens at each measuring place. The pipeline is
//!
//! ```text
//! source --syntax--> Program --semantics--> CompiledUnit --vm--> ResultsDatabase
//! ```
//!
//! with [`runtime`] feeding events from batch files or live connections and
//! [`simulator`] producing deterministic event streams for testing.

pub mod diagnostic;
pub mod runtime;
pub mod semantics;
pub mod simulator;
pub mod store;
pub mod syntax;
pub mod testkit;
pub mod vm;

pub use diagnostic::{Diagnostic, Severity, Span};
pub use runtime::{AgentRuntime, EventMode, Outcome, TimingEvent};
pub use semantics::{compile, AgentTable, CompiledProgram, InitialState};
pub use store::{DataDir, Registry, ResultsDatabase, Runner};
pub use syntax::{parse, pretty_print, Program};
pub use vm::{CompiledUnit, EventContext, Instr};

use std::fmt;

/// Measuring-place number as written in `mp[n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct MpId(pub u32);

/// Agent number as written in an agent declaration and in `agnt[n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl fmt::Display for MpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
