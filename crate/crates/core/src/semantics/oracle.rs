use std::collections::BTreeMap;

use thiserror::Error;

use super::env::AgentTable;
use crate::syntax::{AExpr, BExpr, Stmt};
use crate::AgentId;

/// One competitor's variables.
pub type Row = BTreeMap<String, i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("variable `{0}` is missing from the row")]
    MissingVariable(String),
    #[error("agent {0} is not declared")]
    UnknownAgent(AgentId),
}

fn read(row: &Row, x: &str) -> Result<i64, OracleError> {
    row.get(x).copied().ok_or_else(|| OracleError::MissingVariable(x.to_string()))
}

fn write(row: &mut Row, x: &str, v: i64) -> Result<(), OracleError> {
    match row.get_mut(x) {
        Some(slot) => {
            *slot = v;
            Ok(())
        }
        None => Err(OracleError::MissingVariable(x.to_string())),
    }
}

fn eval_a(a: &AExpr, row: &Row) -> Result<i64, OracleError> {
    match a {
        AExpr::Num(n, _) => Ok(*n),
        AExpr::Var(x, _) => read(row, x.as_str()),
    }
}

fn eval_b(b: &BExpr, row: &Row) -> Result<bool, OracleError> {
    Ok(match b {
        BExpr::True(_) => true,
        BExpr::False(_) => false,
        BExpr::Eq(l, r, _) => eval_a(l, row)? == eval_a(r, row)?,
        BExpr::Neq(l, r, _) => eval_a(l, row)? != eval_a(r, row)?,
    })
}

fn exec(s: &Stmt, agents: &AgentTable, n: AgentId, row: &mut Row, time: i64) -> Result<(), OracleError> {
    match s {
        Stmt::DecLap(x, _) => {
            let v = read(row, x.as_str())?;
            write(row, x.as_str(), v.wrapping_sub(1))
        }
        Stmt::Update(x, _) => {
            if agents.get(n).is_none() {
                return Err(OracleError::UnknownAgent(n));
            }
            write(row, x.as_str(), time)
        }
        Stmt::Assign(x, a, _) => {
            let v = eval_a(a, row)?;
            write(row, x.as_str(), v)
        }
        Stmt::Guarded(b, body, _) => {
            if eval_b(b, row)? {
                exec(body, agents, n, row, time)?;
            }
            Ok(())
        }
        Stmt::Seq(a, b, _) => {
            exec(a, agents, n, row, time)?;
            exec(b, agents, n, row, time)
        }
    }
}

/// Direct meaning of a statement on one competitor's row for an event at
/// `time`, without compiling it.
pub fn oracle_exec(stmt: &Stmt, agents: &AgentTable, n: AgentId, row: &Row, time: i64) -> Result<Row, OracleError> {
    let mut out = row.clone();
    exec(stmt, agents, n, &mut out, time)?;
    Ok(out)
}
