//! Static checking and code generation.
//!
//! Code generation follows the compositional equations of the language: each
//! construct's code is assembled from its parts' code, so
//! `compile_stmt(S1; S2) == compile_stmt(S1) ++ compile_stmt(S2)`. The
//! [`oracle_exec`] interpreter gives statements a meaning directly, without
//! going through the machine, and is what the code generator is tested
//! against.

mod check;
mod codegen;
mod env;
mod oracle;

pub use crate::diagnostic::{codes, Diagnostic, Severity};
pub use crate::vm::EventSource;
pub use check::check;
pub use codegen::{
    canonicalize, compile, compile_aexpr, compile_bexpr, compile_mp, compile_mp_with, compile_source, compile_stmt,
    CodegenError, CompileFailure, CompiledProgram, Lowering,
};
pub use env::{build_agents, build_state, Agent, AgentTable, InitialState};
pub use oracle::{oracle_exec, OracleError, Row};
