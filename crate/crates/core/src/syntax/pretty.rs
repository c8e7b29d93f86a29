use std::fmt::Write;

use super::ast::*;

fn aexpr(a: &AExpr) -> String {
    match a {
        AExpr::Num(n, _) => n.to_string(),
        AExpr::Var(x, _) => x.to_string(),
    }
}

fn bexpr(b: &BExpr) -> String {
    match b {
        BExpr::True(_) => "true".into(),
        BExpr::False(_) => "false".into(),
        BExpr::Eq(l, r, _) => format!("{} == {}", aexpr(l), aexpr(r)),
        BExpr::Neq(l, r, _) => format!("{} != {}", aexpr(l), aexpr(r)),
    }
}

/// Renders a single statement on one line. A `Seq` under a guard (which the
/// concrete grammar cannot express) is rendered as its statements in order.
pub(crate) fn stmt_line(s: &Stmt) -> String {
    match s {
        Stmt::DecLap(x, _) => format!("dec {x};"),
        Stmt::Update(x, _) => format!("upd {x};"),
        Stmt::Assign(x, a, _) => format!("{x} := {};", aexpr(a)),
        Stmt::Guarded(b, body, _) => format!("({}) -> {}", bexpr(b), stmt_line(body)),
        Stmt::Seq(a, b, _) => format!("{} {}", stmt_line(a), stmt_line(b)),
    }
}

/// Canonical source text: agents, declarations and measuring places in
/// separate paragraphs, one statement per line, two-space indentation.
pub fn pretty_print(program: &Program) -> String {
    let mut sections = Vec::new();

    if !program.agents.is_empty() {
        let mut out = String::new();
        for a in &program.agents {
            match a.kind {
                AgentKind::Manual => writeln!(out, "{} manual \"{}\";", a.number, a.source),
                AgentKind::Auto => writeln!(out, "{} auto {};", a.number, a.source),
            }
            .unwrap();
        }
        sections.push(out);
    }

    if !program.decls.is_empty() {
        let mut out = String::new();
        for d in &program.decls {
            writeln!(out, "var {} := {};", d.name, d.init).unwrap();
        }
        sections.push(out);
    }

    let mut out = String::new();
    for m in &program.places {
        writeln!(out, "mp[{}] -> agnt[{}] {{", m.mp, m.agent).unwrap();
        for s in m.body.flatten() {
            writeln!(out, "  {}", stmt_line(s)).unwrap();
        }
        out.push_str("}\n");
    }
    sections.push(out);

    sections.join("\n")
}
