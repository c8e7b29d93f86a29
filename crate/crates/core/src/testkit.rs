//! Seeded random generators for programs, statements and rows, used by the
//! property tests and benchmarks. Everything generated passes the checker.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::diagnostic::Span;
use crate::semantics::{Agent, AgentTable, Row};
use crate::syntax::{AExpr, AgentDecl, AgentKind, BExpr, Ident, MeasuringPlace, Program, Stmt, VarDecl};
use crate::{AgentId, MpId};

/// Deepest guard nesting plus one; a bare statement has depth 1.
pub const MAX_DEPTH: u32 = 5;

const FILES: [&str; 4] = ["abc.res", "manual.txt", "mp-2.dat", "timer_1.res"];

fn sp() -> Span {
    Span::default()
}

pub fn var_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("V{i}")).collect()
}

fn random_ip<R: Rng + ?Sized>(rng: &mut R) -> String {
    let octet = |rng: &mut R| rng.random_range(0..=255u16).to_string();
    format!("{}.{}.{}.{}", octet(rng), octet(rng), octet(rng), octet(rng))
}

pub fn random_agents<R: Rng + ?Sized>(rng: &mut R, n: u32) -> Vec<AgentDecl> {
    (1..=n)
        .map(|i| {
            let (kind, source) = if rng.random_bool(0.5) {
                (AgentKind::Manual, FILES.choose(rng).unwrap().to_string())
            } else {
                (AgentKind::Auto, random_ip(rng))
            };
            AgentDecl { number: AgentId(i), kind, source, span: sp() }
        })
        .collect()
}

pub fn agent_table(decls: &[AgentDecl]) -> AgentTable {
    let mut t = AgentTable::default();
    for d in decls {
        t.insert(d.number, Agent { kind: d.kind, source: d.source.clone() });
    }
    t
}

fn random_num<R: Rng + ?Sized>(rng: &mut R) -> i64 {
    // Small values make guards like `X == 3` hit often.
    if rng.random_bool(0.7) {
        rng.random_range(0..=5)
    } else {
        rng.random_range(0..=1_000_000)
    }
}

pub fn random_aexpr<R: Rng + ?Sized>(rng: &mut R, vars: &[String]) -> AExpr {
    if rng.random_bool(0.5) {
        AExpr::Num(random_num(rng), sp())
    } else {
        AExpr::Var(Ident::new(vars.choose(rng).unwrap().as_str()), sp())
    }
}

pub fn random_bexpr<R: Rng + ?Sized>(rng: &mut R, vars: &[String]) -> BExpr {
    match rng.random_range(0..10) {
        0 => BExpr::True(sp()),
        1 => BExpr::False(sp()),
        2..=5 => BExpr::Eq(random_aexpr(rng, vars), random_aexpr(rng, vars), sp()),
        _ => BExpr::Neq(random_aexpr(rng, vars), random_aexpr(rng, vars), sp()),
    }
}

/// One statement of at most `depth` levels. Guard bodies are never
/// sequences, matching what the grammar can express.
pub fn random_simple_stmt<R: Rng + ?Sized>(rng: &mut R, vars: &[String], depth: u32) -> Stmt {
    let var = |rng: &mut R| Ident::new(vars.choose(rng).unwrap().as_str());
    let pick = if depth <= 1 { rng.random_range(0..3) } else { rng.random_range(0..5) };
    match pick {
        0 => Stmt::DecLap(var(rng), sp()),
        1 => Stmt::Update(var(rng), sp()),
        2 => Stmt::Assign(var(rng), random_aexpr(rng, vars), sp()),
        _ => {
            let b = random_bexpr(rng, vars);
            Stmt::Guarded(b, Box::new(random_simple_stmt(rng, vars, depth - 1)), sp())
        }
    }
}

/// A right-associated sequence of 1..=`max_len` statements.
pub fn random_stmt<R: Rng + ?Sized>(rng: &mut R, vars: &[String], depth: u32, max_len: usize) -> Stmt {
    let len = rng.random_range(1..=max_len.max(1));
    Stmt::seq((0..len).map(|_| random_simple_stmt(rng, vars, depth)).collect()).unwrap()
}

pub fn random_row<R: Rng + ?Sized>(rng: &mut R, vars: &[String]) -> Row {
    vars.iter().map(|v| (v.clone(), random_num(rng))).collect()
}

/// A complete well-checked program: 1..=3 agents, 1..=6 variables,
/// 1..=4 measuring places with distinct numbers.
pub fn random_program<R: Rng + ?Sized>(rng: &mut R) -> Program {
    let n_agents = rng.random_range(1..=3);
    let agents = random_agents(rng, n_agents);
    let vars = var_names(rng.random_range(1..=6));
    let decls =
        vars.iter().map(|v| VarDecl { name: Ident::new(v.as_str()), init: random_num(rng), span: sp() }).collect();
    let mut mps: Vec<u32> = (1..=9).collect();
    let n_places = rng.random_range(1..=4);
    let places = (0..n_places)
        .map(|_| {
            let mp = mps.remove(rng.random_range(0..mps.len()));
            MeasuringPlace {
                mp: MpId(mp),
                agent: AgentId(rng.random_range(1..=n_agents)),
                body: random_stmt(rng, &vars, MAX_DEPTH, 4),
                span: sp(),
            }
        })
        .collect();
    Program { agents, decls, places }
}
