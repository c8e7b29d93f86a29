//! The stack machine that executes compiled measuring-place code against one
//! competitor row at a time, plus the canonical code text format.

mod instr;
mod machine;
mod text;

pub use instr::{CodeBlock, CompiledUnit, EventSource, Instr};
pub use machine::{run, step, Config, Database, EventContext, StackValue, VmError};
pub use text::{parse_code, serialize_block, serialize_code, CodeFormatError};
