use std::fmt;

use thiserror::Error;

use super::check::check;
use super::env::{fold_agents, fold_state, AgentTable, InitialState};
use crate::diagnostic::Diagnostic;
use crate::syntax::{parse, AExpr, BExpr, MeasuringPlace, Program, Stmt};
use crate::vm::{CodeBlock, CompiledUnit, Instr};
use crate::{AgentId, MpId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodegenError {
    #[error("agent {0} is not declared")]
    UnknownAgent(AgentId),
}

pub fn compile_aexpr(a: &AExpr) -> Vec<Instr> {
    match a {
        AExpr::Num(n, _) => vec![Instr::Push(*n)],
        AExpr::Var(x, _) => vec![Instr::Fetch(x.0.clone())],
    }
}

/// Comparison operands are emitted right operand first, so the left operand
/// ends up on top of the stack.
pub fn compile_bexpr(b: &BExpr) -> Vec<Instr> {
    match b {
        BExpr::True(_) => vec![Instr::True],
        BExpr::False(_) => vec![Instr::False],
        BExpr::Eq(l, r, _) | BExpr::Neq(l, r, _) => {
            let mut code = compile_aexpr(r);
            code.extend(compile_aexpr(l));
            code.push(if matches!(b, BExpr::Eq(..)) { Instr::Eq } else { Instr::Neq });
            code
        }
    }
}

/// Code for a statement executed at a measuring place controlled by agent
/// `n`. `upd x` reads the time from that agent's source.
pub fn compile_stmt(s: &Stmt, agents: &AgentTable, n: AgentId) -> Result<Vec<Instr>, CodegenError> {
    Ok(match s {
        Stmt::DecLap(x, _) => vec![Instr::Fetch(x.0.clone()), Instr::Dec, Instr::Store(x.0.clone())],
        Stmt::Update(x, _) => {
            let src = agents.event_source(n).ok_or(CodegenError::UnknownAgent(n))?;
            vec![Instr::FetchSrc(src), Instr::Store(x.0.clone())]
        }
        Stmt::Assign(x, a, _) => {
            let mut code = compile_aexpr(a);
            code.push(Instr::Store(x.0.clone()));
            code
        }
        Stmt::Guarded(b, body, _) => {
            let mut code = compile_bexpr(b);
            code.push(Instr::Branch(compile_stmt(body, agents, n)?, vec![Instr::Noop]));
            code
        }
        Stmt::Seq(a, b, _) => {
            let mut code = compile_stmt(a, agents, n)?;
            code.extend(compile_stmt(b, agents, n)?);
            code
        }
    })
}

/// How a measuring-place body is turned into code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Lowering {
    /// Statement by statement, exactly as [`compile_stmt`] does.
    Literal,
    /// The form used for stored programs: see [`canonicalize`].
    #[default]
    Canonical,
}

fn elide_true_guards(s: &Stmt) -> Stmt {
    match s {
        Stmt::Guarded(BExpr::True(_), body, _) => elide_true_guards(body),
        Stmt::Guarded(b, body, span) => Stmt::Guarded(b.clone(), Box::new(elide_true_guards(body)), *span),
        Stmt::Seq(a, b, span) => Stmt::Seq(Box::new(elide_true_guards(a)), Box::new(elide_true_guards(b)), *span),
        other => other.clone(),
    }
}

/// Rewrites a measuring-place body into its canonical, meaning-preserving
/// form:
///
/// * `(true) -> S` becomes `S`;
/// * an unconditional `upd x` is moved ahead of the statements before it
///   that do not mention `x`, stopping at another unconditional `upd`. Time
///   stamps are recorded first, bookkeeping after.
///
/// Both rewrites commute statements that touch disjoint variables, so the
/// body's effect on a row is unchanged.
pub fn canonicalize(body: &Stmt) -> Stmt {
    let elided = elide_true_guards(body);
    let mut scheduled: Vec<Stmt> = Vec::new();
    for s in elided.flatten() {
        let mut at = scheduled.len();
        if let Stmt::Update(x, _) = s {
            while at > 0 {
                let prev = &scheduled[at - 1];
                if matches!(prev, Stmt::Update(..)) || prev.vars().contains(&x) {
                    break;
                }
                at -= 1;
            }
        }
        scheduled.insert(at, s.clone());
    }
    Stmt::seq(scheduled).expect("flatten yields at least one statement")
}

/// Code block for one measuring place under the canonical lowering.
pub fn compile_mp(m: &MeasuringPlace, agents: &AgentTable) -> Result<CodeBlock, CodegenError> {
    compile_mp_with(m, agents, Lowering::Canonical)
}

/// `WAIT` followed by the body's code, tagged with the place number.
pub fn compile_mp_with(m: &MeasuringPlace, agents: &AgentTable, lowering: Lowering) -> Result<CodeBlock, CodegenError> {
    let body = match lowering {
        Lowering::Literal => compile_stmt(&m.body, agents, m.agent)?,
        Lowering::Canonical => compile_stmt(&canonicalize(&m.body), agents, m.agent)?,
    };
    let mut code = Vec::with_capacity(body.len() + 1);
    code.push(Instr::Wait);
    code.extend(body);
    Ok(CodeBlock { mp: m.mp, code })
}

/// Successful compilation: the code of every measuring place plus the initial
/// values the results database is created from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledProgram {
    pub unit: CompiledUnit,
    pub agents: AgentTable,
    pub state: InitialState,
}

/// Failed compilation. No code is produced; the overall status is `ERROR`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct CompileFailure {
    pub diagnostics: Vec<Diagnostic>,
}

impl CompileFailure {
    pub const STATUS: &'static str = "ERROR";

    pub fn mentions(&self, needle: &str) -> bool {
        self.diagnostics.iter().any(|d| d.message.contains(needle))
    }
}

impl fmt::Display for CompileFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.diagnostics {
            writeln!(f, "{d}")?;
        }
        f.write_str(Self::STATUS)
    }
}

/// Checks and compiles a parsed program. Every diagnostic from agent and
/// variable collection and from the context checks is reported together.
pub fn compile(program: &Program) -> Result<CompiledProgram, CompileFailure> {
    let (agents, mut diagnostics) = fold_agents(&program.agents);
    let (state, state_diags) = fold_state(&program.decls);
    diagnostics.extend(state_diags);
    diagnostics.extend(check(program, &agents, &state));
    if diagnostics.iter().any(Diagnostic::is_error) {
        diagnostics.sort_by_key(|d| d.span.start);
        return Err(CompileFailure { diagnostics });
    }

    let mut blocks = Vec::with_capacity(program.places.len());
    for m in &program.places {
        let block = compile_mp(m, &agents).map_err(|e| CompileFailure {
            diagnostics: vec![Diagnostic::error(crate::diagnostic::codes::UNKNOWN_AGENT, e.to_string(), m.span)],
        })?;
        blocks.push(block);
    }
    Ok(CompiledProgram { unit: CompiledUnit { blocks }, agents, state })
}

/// Parses and compiles source text.
pub fn compile_source(source: &str) -> Result<CompiledProgram, CompileFailure> {
    let program = parse(source).map_err(|diagnostics| CompileFailure { diagnostics })?;
    compile(&program)
}

impl CompiledProgram {
    pub fn mp_ids(&self) -> Vec<MpId> {
        self.unit.mp_ids().collect()
    }
}
