use std::collections::HashSet;

use super::env::{AgentTable, InitialState};
use crate::diagnostic::{codes, Diagnostic, Span};
use crate::syntax::{AExpr, BExpr, Ident, Program, Stmt};

fn undeclared(x: &Ident, span: Span) -> Diagnostic {
    Diagnostic::error(codes::UNDECLARED_VARIABLE, format!("variable `{x}` is not declared"), span)
}

fn check_aexpr(a: &AExpr, state: &InitialState, out: &mut Vec<Diagnostic>) {
    if let AExpr::Var(x, span) = a {
        if !state.contains(x.as_str()) {
            out.push(undeclared(x, *span));
        }
    }
}

fn check_stmt(s: &Stmt, state: &InitialState, out: &mut Vec<Diagnostic>) {
    match s {
        Stmt::DecLap(x, span) | Stmt::Update(x, span) => {
            if !state.contains(x.as_str()) {
                out.push(undeclared(x, *span));
            }
        }
        Stmt::Assign(x, a, span) => {
            if !state.contains(x.as_str()) {
                out.push(undeclared(x, *span));
            }
            check_aexpr(a, state, out);
        }
        Stmt::Guarded(b, body, _) => {
            if let BExpr::Eq(l, r, _) | BExpr::Neq(l, r, _) = b {
                check_aexpr(l, state, out);
                check_aexpr(r, state, out);
            }
            check_stmt(body, state, out);
        }
        Stmt::Seq(a, b, _) => {
            check_stmt(a, state, out);
            check_stmt(b, state, out);
        }
    }
}

/// Context checks on a parsed program: only declared variables may be used,
/// every measuring place must name a declared agent, and measuring-place
/// numbers must be unique. An empty result means the program compiles.
pub fn check(program: &Program, agents: &AgentTable, state: &InitialState) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for m in &program.places {
        if !seen.insert(m.mp) {
            out.push(Diagnostic::error(
                codes::DUPLICATE_MEASURING_PLACE,
                format!("measuring place {} is defined more than once", m.mp),
                m.span,
            ));
        }
        if agents.get(m.agent).is_none() {
            out.push(Diagnostic::error(
                codes::UNKNOWN_AGENT,
                format!("measuring place {} refers to undeclared agent {}", m.mp, m.agent),
                m.span,
            ));
        }
        check_stmt(&m.body, state, &mut out);
    }
    out
}
