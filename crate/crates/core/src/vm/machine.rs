use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use super::instr::{EventSource, Instr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackValue {
    Int(i64),
    Bool(bool),
}

impl fmt::Display for StackValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StackValue::Int(z) => write!(f, "{z}"),
            StackValue::Bool(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VmError {
    #[error("type fault at {instr}: {detail}")]
    TypeFault { instr: &'static str, detail: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown competitor {0}")]
    UnknownCompetitor(i64),
    #[error("{0} executed before WAIT bound a competitor")]
    Unbound(&'static str),
    #[error("code block does not start with WAIT")]
    MissingWait,
    #[error("no instruction left to execute")]
    EmptyCode,
}

/// Row-addressed storage the machine reads and writes.
pub trait Database {
    fn has_row(&self, id: i64) -> bool;
    fn select(&self, id: i64, column: &str) -> Result<i64, VmError>;
    fn update(&mut self, id: i64, column: &str, value: i64) -> Result<(), VmError>;
}

/// The event being processed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventContext {
    pub competitor: i64,
    /// Seconds since 1970-01-01.
    pub time: i64,
    /// Source of the agent that delivered the event; `FETCH` of a different
    /// source is logged but still yields `time`.
    pub source: Option<EventSource>,
}

impl EventContext {
    pub fn new(competitor: i64, time: i64) -> Self {
        EventContext { competitor, time, source: None }
    }
}

/// Machine configuration minus the database: remaining code, evaluation
/// stack (top is the last element) and the bound competitor.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Config {
    pub code: VecDeque<Instr>,
    pub stack: Vec<StackValue>,
    pub competitor: Option<i64>,
}

impl Config {
    pub fn new(code: impl IntoIterator<Item = Instr>) -> Self {
        Config { code: code.into_iter().collect(), ..Default::default() }
    }
}

fn pop_int(stack: &mut Vec<StackValue>, instr: &'static str) -> Result<i64, VmError> {
    match stack.pop() {
        Some(StackValue::Int(z)) => Ok(z),
        Some(other) => Err(VmError::TypeFault { instr, detail: format!("expected integer, found {other}") }),
        None => Err(VmError::TypeFault { instr, detail: "stack underflow".into() }),
    }
}

fn bound(config: &Config, instr: &'static str) -> Result<i64, VmError> {
    config.competitor.ok_or(VmError::Unbound(instr))
}

/// Applies exactly one transition to `config`.
pub fn step<D: Database + ?Sized>(config: &mut Config, db: &mut D, ctx: &EventContext) -> Result<(), VmError> {
    let instr = config.code.pop_front().ok_or(VmError::EmptyCode)?;
    let stack = &mut config.stack;
    match instr {
        Instr::Push(n) => stack.push(StackValue::Int(n)),
        Instr::True => stack.push(StackValue::Bool(true)),
        Instr::False => stack.push(StackValue::Bool(false)),
        Instr::Eq | Instr::Neq => {
            let name = if instr == Instr::Eq { "EQ" } else { "NEQ" };
            let z1 = pop_int(stack, name)?;
            let z2 = pop_int(stack, name)?;
            let equal = z1 == z2;
            stack.push(StackValue::Bool(if instr == Instr::Eq { equal } else { !equal }));
        }
        Instr::Dec => {
            let z = pop_int(stack, "DEC")?;
            stack.push(StackValue::Int(z.wrapping_sub(1)));
        }
        Instr::Wait => config.competitor = Some(ctx.competitor),
        Instr::Fetch(x) => {
            let j = bound(config, "FETCH")?;
            let z = db.select(j, &x)?;
            config.stack.push(StackValue::Int(z));
        }
        Instr::FetchSrc(src) => {
            if let Some(delivering) = &ctx.source {
                if *delivering != src {
                    log::warn!("code reads {src} but the event was delivered by {delivering}");
                }
            }
            stack.push(StackValue::Int(ctx.time));
        }
        Instr::Store(x) => {
            let j = bound(config, "STORE")?;
            let z = pop_int(&mut config.stack, "STORE")?;
            db.update(j, &x, z)?;
        }
        Instr::Noop => {}
        Instr::Branch(then_code, else_code) => {
            let taken = match stack.pop() {
                Some(StackValue::Bool(t)) => t,
                Some(other) => {
                    return Err(VmError::TypeFault {
                        instr: "BRANCH",
                        detail: format!("expected truth value, found {other}"),
                    })
                }
                None => return Err(VmError::TypeFault { instr: "BRANCH", detail: "stack underflow".into() }),
            };
            let arm = if taken { then_code } else { else_code };
            for i in arm.into_iter().rev() {
                config.code.push_front(i);
            }
        }
    }
    Ok(())
}

/// Buffers writes on top of a read-only base so a faulting block leaves the
/// database untouched.
struct Pending<'a, D: ?Sized> {
    base: &'a D,
    writes: Vec<(i64, String, i64)>,
}

impl<D: Database + ?Sized> Database for Pending<'_, D> {
    fn has_row(&self, id: i64) -> bool {
        self.base.has_row(id)
    }

    fn select(&self, id: i64, column: &str) -> Result<i64, VmError> {
        match self.writes.iter().rev().find(|(i, c, _)| *i == id && c == column) {
            Some(&(_, _, v)) => Ok(v),
            None => self.base.select(id, column),
        }
    }

    fn update(&mut self, id: i64, column: &str, value: i64) -> Result<(), VmError> {
        // validates the row and column exist
        self.base.select(id, column)?;
        self.writes.push((id, column.to_string(), value));
        Ok(())
    }
}

/// Runs a measuring-place block for one event and commits its stores.
///
/// Returns the number of transitions taken. On error nothing is written.
pub fn run<D: Database + ?Sized>(code: &[Instr], db: &mut D, ctx: &EventContext) -> Result<usize, VmError> {
    if code.first() != Some(&Instr::Wait) {
        return Err(VmError::MissingWait);
    }
    if !db.has_row(ctx.competitor) {
        return Err(VmError::UnknownCompetitor(ctx.competitor));
    }
    let mut config = Config::new(code.iter().cloned());
    let mut pending = Pending { base: &*db, writes: Vec::new() };
    let mut steps = 0;
    while !config.code.is_empty() {
        step(&mut config, &mut pending, ctx)?;
        steps += 1;
    }
    let writes = pending.writes;
    for (id, column, value) in writes {
        db.update(id, &column, value)?;
    }
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use StackValue::{Bool, Int};

    /// Minimal in-memory table: (id, column) -> value.
    #[derive(Debug, Clone, PartialEq, Default)]
    struct Table(BTreeMap<(i64, String), i64>);

    impl Table {
        fn with(rows: &[(i64, &str, i64)]) -> Self {
            Table(rows.iter().map(|&(i, c, v)| ((i, c.to_string()), v)).collect())
        }
    }

    impl Database for Table {
        fn has_row(&self, id: i64) -> bool {
            self.0.keys().any(|(i, _)| *i == id)
        }
        fn select(&self, id: i64, column: &str) -> Result<i64, VmError> {
            if !self.has_row(id) {
                return Err(VmError::UnknownCompetitor(id));
            }
            self.0.get(&(id, column.to_string())).copied().ok_or_else(|| VmError::UnknownVariable(column.into()))
        }
        fn update(&mut self, id: i64, column: &str, value: i64) -> Result<(), VmError> {
            self.select(id, column)?;
            self.0.insert((id, column.to_string()), value);
            Ok(())
        }
    }

    fn ctx() -> EventContext {
        EventContext::new(7, 3600)
    }

    /// Runs one step from (code ++ [rest], stack, j) and returns the result.
    fn one(code: Vec<Instr>, stack: Vec<StackValue>, j: Option<i64>, db: &mut Table) -> Config {
        let mut c = Config { code: code.into(), stack, competitor: j };
        step(&mut c, db, &ctx()).unwrap();
        c
    }

    fn cfg(code: Vec<Instr>, stack: Vec<StackValue>, j: Option<i64>) -> Config {
        Config { code: code.into(), stack, competitor: j }
    }

    // One test per transition rule. Each leaves a trailing NOOP in `c` to
    // check the rest of the code is preserved.

    #[test]
    fn rule_push() {
        let mut db = Table::with(&[(7, "X", 1)]);
        let before = db.clone();
        let c = one(vec![Instr::Push(5), Instr::Noop], vec![Int(1)], Some(7), &mut db);
        assert_eq!(c, cfg(vec![Instr::Noop], vec![Int(1), Int(5)], Some(7)));
        assert_eq!(db, before);
    }

    #[test]
    fn rule_true() {
        let mut db = Table::default();
        let c = one(vec![Instr::True, Instr::Noop], vec![], Some(7), &mut db);
        assert_eq!(c, cfg(vec![Instr::Noop], vec![Bool(true)], Some(7)));
        assert_eq!(db, Table::default());
    }

    #[test]
    fn rule_false() {
        let mut db = Table::default();
        let c = one(vec![Instr::False, Instr::Noop], vec![], Some(7), &mut db);
        assert_eq!(c, cfg(vec![Instr::Noop], vec![Bool(false)], Some(7)));
        assert_eq!(db, Table::default());
    }

    #[test]
    fn rule_eq() {
        let mut db = Table::default();
        let c = one(vec![Instr::Eq, Instr::Noop], vec![Int(9), Int(7), Int(7)], Some(7), &mut db);
        assert_eq!(c, cfg(vec![Instr::Noop], vec![Int(9), Bool(true)], Some(7)));
        let c = one(vec![Instr::Eq], vec![Int(7), Int(8)], Some(7), &mut db);
        assert_eq!(c.stack, vec![Bool(false)]);
        assert_eq!(db, Table::default());
    }

    #[test]
    fn rule_neq() {
        let mut db = Table::default();
        let c = one(vec![Instr::Neq, Instr::Noop], vec![Int(7), Int(8)], Some(7), &mut db);
        assert_eq!(c, cfg(vec![Instr::Noop], vec![Bool(true)], Some(7)));
        let c = one(vec![Instr::Neq], vec![Int(3), Int(3)], Some(7), &mut db);
        assert_eq!(c.stack, vec![Bool(false)]);
    }

    #[test]
    fn rule_dec() {
        let mut db = Table::default();
        let c = one(vec![Instr::Dec, Instr::Noop], vec![Int(5)], Some(7), &mut db);
        assert_eq!(c, cfg(vec![Instr::Noop], vec![Int(4)], Some(7)));
        let c = one(vec![Instr::Dec], vec![Int(0)], Some(7), &mut db);
        assert_eq!(c.stack, vec![Int(-1)]);
    }

    #[test]
    fn rule_wait() {
        let mut db = Table::with(&[(7, "X", 0)]);
        let c = one(vec![Instr::Wait, Instr::Noop], vec![Int(2)], None, &mut db);
        assert_eq!(c, cfg(vec![Instr::Noop], vec![Int(2)], Some(7)));
        let c = one(vec![Instr::Wait], vec![], Some(3), &mut db);
        assert_eq!(c.competitor, Some(7));
    }

    #[test]
    fn rule_fetch_variable() {
        let mut db = Table::with(&[(7, "ROUND1", 20), (8, "ROUND1", 3)]);
        let before = db.clone();
        let c = one(vec![Instr::Fetch("ROUND1".into()), Instr::Noop], vec![], Some(7), &mut db);
        assert_eq!(c, cfg(vec![Instr::Noop], vec![Int(20)], Some(7)));
        assert_eq!(db, before);
    }

    #[test]
    fn rule_fetch_accessfile() {
        let mut db = Table::default();
        let src = EventSource::AccessFile("abc.res".into());
        let c = one(vec![Instr::FetchSrc(src), Instr::Noop], vec![], Some(7), &mut db);
        assert_eq!(c, cfg(vec![Instr::Noop], vec![Int(3600)], Some(7)));
        assert_eq!(db, Table::default());
    }

    #[test]
    fn rule_fetch_connect() {
        let mut db = Table::default();
        let src = EventSource::Connect("192.168.225.100".into());
        let c = one(vec![Instr::FetchSrc(src), Instr::Noop], vec![Int(1)], Some(7), &mut db);
        assert_eq!(c, cfg(vec![Instr::Noop], vec![Int(1), Int(3600)], Some(7)));
        assert_eq!(db, Table::default());
    }

    #[test]
    fn rule_store() {
        let mut db = Table::with(&[(7, "SWIM", 0), (8, "SWIM", 0)]);
        let c = one(vec![Instr::Store("SWIM".into()), Instr::Noop], vec![Int(1), Int(3600)], Some(7), &mut db);
        assert_eq!(c, cfg(vec![Instr::Noop], vec![Int(1)], Some(7)));
        assert_eq!(db, Table::with(&[(7, "SWIM", 3600), (8, "SWIM", 0)]));
    }

    #[test]
    fn rule_noop() {
        let mut db = Table::default();
        let c = one(vec![Instr::Noop, Instr::Dec], vec![Int(4)], Some(7), &mut db);
        assert_eq!(c, cfg(vec![Instr::Dec], vec![Int(4)], Some(7)));
    }

    #[test]
    fn rule_branch() {
        let mut db = Table::default();
        let branch = Instr::Branch(vec![Instr::Noop], vec![Instr::Push(1)]);
        let c = one(vec![branch.clone()], vec![Bool(false)], Some(7), &mut db);
        assert_eq!(c, cfg(vec![Instr::Push(1)], vec![], Some(7)));
        let c = one(vec![branch, Instr::Dec], vec![Bool(true)], Some(7), &mut db);
        assert_eq!(c, cfg(vec![Instr::Noop, Instr::Dec], vec![], Some(7)));
    }

    #[test]
    fn type_faults() {
        let mut db = Table::with(&[(7, "X", 0)]);
        let mut c = cfg(vec![Instr::Eq], vec![Int(1)], Some(7));
        assert!(matches!(step(&mut c, &mut db, &ctx()), Err(VmError::TypeFault { .. })));
        let mut c = cfg(vec![Instr::Dec], vec![Bool(true)], Some(7));
        assert!(matches!(step(&mut c, &mut db, &ctx()), Err(VmError::TypeFault { .. })));
        let mut c = cfg(vec![Instr::Branch(vec![], vec![])], vec![Int(0)], Some(7));
        assert!(matches!(step(&mut c, &mut db, &ctx()), Err(VmError::TypeFault { .. })));
        let mut c = cfg(vec![Instr::Fetch("NOPE".into())], vec![], Some(7));
        assert_eq!(step(&mut c, &mut db, &ctx()), Err(VmError::UnknownVariable("NOPE".into())));
        let mut c = cfg(vec![Instr::Fetch("X".into())], vec![], None);
        assert_eq!(step(&mut c, &mut db, &ctx()), Err(VmError::Unbound("FETCH")));
        let mut c = cfg(vec![], vec![], None);
        assert_eq!(step(&mut c, &mut db, &ctx()), Err(VmError::EmptyCode));
    }

    #[test]
    fn run_is_atomic() {
        let mut db = Table::with(&[(7, "A", 1), (7, "B", 2)]);
        let before = db.clone();
        let code = vec![Instr::Wait, Instr::Push(10), Instr::Store("A".into()), Instr::Fetch("MISSING".into())];
        assert!(run(&code, &mut db, &ctx()).is_err());
        assert_eq!(db, before);
    }

    #[test]
    fn run_reads_its_own_writes() {
        let mut db = Table::with(&[(7, "A", 1)]);
        let code = vec![
            Instr::Wait,
            Instr::Fetch("A".into()),
            Instr::Dec,
            Instr::Store("A".into()),
            Instr::Fetch("A".into()),
            Instr::Dec,
            Instr::Store("A".into()),
        ];
        assert_eq!(run(&code, &mut db, &ctx()), Ok(7));
        assert_eq!(db.select(7, "A"), Ok(-1));
    }

    #[test]
    fn run_preconditions() {
        let mut db = Table::with(&[(7, "A", 1)]);
        assert_eq!(run(&[Instr::Noop], &mut db, &ctx()), Err(VmError::MissingWait));
        let other = EventContext::new(99, 1);
        assert_eq!(run(&[Instr::Wait, Instr::Noop], &mut db, &other), Err(VmError::UnknownCompetitor(99)));
        let before = db.clone();
        assert_eq!(run(&[Instr::Wait, Instr::Noop], &mut db, &ctx()), Ok(2));
        assert_eq!(db, before);
    }
}
