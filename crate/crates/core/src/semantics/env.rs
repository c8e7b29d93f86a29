use std::collections::BTreeMap;

use indexmap::IndexMap;

use crate::diagnostic::{codes, Diagnostic};
use crate::syntax::{AgentDecl, AgentKind, VarDecl};
use crate::vm::EventSource;
use crate::AgentId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agent {
    pub kind: AgentKind,
    /// File name for manual agents, dotted quad for automatic ones.
    pub source: String,
}

impl Agent {
    pub fn event_source(&self) -> EventSource {
        match self.kind {
            AgentKind::Manual => EventSource::AccessFile(self.source.clone()),
            AgentKind::Auto => EventSource::Connect(self.source.clone()),
        }
    }
}

/// Agent number -> (kind, source).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AgentTable(BTreeMap<AgentId, Agent>);

impl AgentTable {
    pub fn get(&self, n: AgentId) -> Option<&Agent> {
        self.0.get(&n)
    }

    pub fn event_source(&self, n: AgentId) -> Option<EventSource> {
        self.get(n).map(Agent::event_source)
    }

    pub fn insert(&mut self, n: AgentId, agent: Agent) -> Option<Agent> {
        self.0.insert(n, agent)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AgentId, &Agent)> {
        self.0.iter().map(|(k, v)| (*k, v))
    }
}

/// Declared variables with their initial values, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InitialState(IndexMap<String, i64>);

impl InitialState {
    pub fn get(&self, name: &str) -> Option<i64> {
        self.0.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, i64)> for InitialState {
    fn from_iter<I: IntoIterator<Item = (String, i64)>>(iter: I) -> Self {
        InitialState(iter.into_iter().collect())
    }
}

/// Left-to-right fold keeping the first declaration of each number.
pub(crate) fn fold_agents(decls: &[AgentDecl]) -> (AgentTable, Vec<Diagnostic>) {
    let mut table = AgentTable::default();
    let mut diags = Vec::new();
    for d in decls {
        if table.get(d.number).is_some() {
            diags.push(Diagnostic::error(
                codes::DUPLICATE_AGENT,
                format!("agent {} is declared more than once", d.number),
                d.span,
            ));
            continue;
        }
        table.insert(d.number, Agent { kind: d.kind, source: d.source.clone() });
    }
    (table, diags)
}

pub(crate) fn fold_state(decls: &[VarDecl]) -> (InitialState, Vec<Diagnostic>) {
    let mut state = IndexMap::new();
    let mut diags = Vec::new();
    for d in decls {
        if state.contains_key(d.name.as_str()) {
            diags.push(Diagnostic::error(
                codes::DUPLICATE_VARIABLE,
                format!("multiple declarations of variable `{}`", d.name),
                d.span,
            ));
            continue;
        }
        state.insert(d.name.0.clone(), d.init);
    }
    (InitialState(state), diags)
}

/// Builds the agent table. A number declared twice is an error.
pub fn build_agents(decls: &[AgentDecl]) -> Result<AgentTable, Vec<Diagnostic>> {
    match fold_agents(decls) {
        (table, diags) if diags.is_empty() => Ok(table),
        (_, diags) => Err(diags),
    }
}

/// Builds the initial variable state. A name declared twice is an error.
pub fn build_state(decls: &[VarDecl]) -> Result<InitialState, Vec<Diagnostic>> {
    match fold_state(decls) {
        (state, diags) if diags.is_empty() => Ok(state),
        (_, diags) => Err(diags),
    }
}
