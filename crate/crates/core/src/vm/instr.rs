use std::fmt;

use crate::MpId;

/// Where an `upd` statement reads its time from: the operator's event file
/// (manual agent) or the measuring device (automatic agent).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EventSource {
    AccessFile(String),
    Connect(String),
}

impl fmt::Display for EventSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventSource::AccessFile(file) => write!(f, "accessfile(\"{file}\")"),
            EventSource::Connect(ip) => write!(f, "connect({ip})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instr {
    Push(i64),
    True,
    False,
    Eq,
    Neq,
    Dec,
    /// Binds the competitor of the incoming event.
    Wait,
    /// Reads a database column of the current competitor.
    Fetch(String),
    /// Reads the event time delivered by an agent.
    FetchSrc(EventSource),
    Store(String),
    Noop,
    Branch(Vec<Instr>, Vec<Instr>),
}

impl Instr {
    /// Number of instructions including everything nested in branch arms.
    pub fn flat_len(code: &[Instr]) -> usize {
        code.iter()
            .map(|i| match i {
                Instr::Branch(a, b) => 1 + Instr::flat_len(a) + Instr::flat_len(b),
                _ => 1,
            })
            .sum()
    }
}

/// Code of one measuring place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeBlock {
    pub mp: MpId,
    pub code: Vec<Instr>,
}

impl CodeBlock {
    /// First event source read by the block, which identifies the agent
    /// controlling the measuring place.
    pub fn source(&self) -> Option<&EventSource> {
        fn find(code: &[Instr]) -> Option<&EventSource> {
            code.iter().find_map(|i| match i {
                Instr::FetchSrc(src) => Some(src),
                Instr::Branch(a, b) => find(a).or_else(|| find(b)),
                _ => None,
            })
        }
        find(&self.code)
    }
}

/// All measuring-place blocks of a program, in source order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CompiledUnit {
    pub blocks: Vec<CodeBlock>,
}

impl CompiledUnit {
    pub fn block(&self, mp: MpId) -> Option<&CodeBlock> {
        self.blocks.iter().find(|b| b.mp == mp)
    }

    pub fn mp_ids(&self) -> impl Iterator<Item = MpId> + '_ {
        self.blocks.iter().map(|b| b.mp)
    }

    /// Event source of the agent that controls `mp`, if its code reads one.
    pub fn source_of(&self, mp: MpId) -> Option<&EventSource> {
        self.block(mp).and_then(CodeBlock::source)
    }
}
