use std::fmt;

use crate::diagnostic::Span;
use crate::{AgentId, MpId};

/// Variable name; letters, digits and underscores, starting with a letter.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident(pub String);

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Ident(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Manual,
    Auto,
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentKind::Manual => "manual",
            AgentKind::Auto => "auto",
        })
    }
}

/// `n manual "file";` or `n auto a.b.c.d;`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentDecl {
    pub number: AgentId,
    pub kind: AgentKind,
    pub source: String,
    pub span: Span,
}

/// `var x := n;`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: Ident,
    pub init: i64,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AExpr {
    Num(i64, Span),
    Var(Ident, Span),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BExpr {
    True(Span),
    False(Span),
    Eq(AExpr, AExpr, Span),
    Neq(AExpr, AExpr, Span),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    /// `dec x;`
    DecLap(Ident, Span),
    /// `upd x;`
    Update(Ident, Span),
    /// `x := a;`
    Assign(Ident, AExpr, Span),
    /// `(b) -> S`
    Guarded(BExpr, Box<Stmt>, Span),
    /// `S1 S2`, right-associated as parsed.
    Seq(Box<Stmt>, Box<Stmt>, Span),
}

/// `mp[n1] -> agnt[n2] { ... }`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasuringPlace {
    pub mp: MpId,
    pub agent: AgentId,
    pub body: Stmt,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub agents: Vec<AgentDecl>,
    pub decls: Vec<VarDecl>,
    pub places: Vec<MeasuringPlace>,
}

impl AExpr {
    pub fn span(&self) -> Span {
        match self {
            AExpr::Num(_, s) | AExpr::Var(_, s) => *s,
        }
    }

    fn strip(&mut self) {
        match self {
            AExpr::Num(_, s) | AExpr::Var(_, s) => *s = Span::default(),
        }
    }
}

impl BExpr {
    pub fn span(&self) -> Span {
        match self {
            BExpr::True(s) | BExpr::False(s) | BExpr::Eq(.., s) | BExpr::Neq(.., s) => *s,
        }
    }

    /// Variables read by the condition.
    pub fn vars(&self) -> impl Iterator<Item = &Ident> {
        let (l, r) = match self {
            BExpr::Eq(l, r, _) | BExpr::Neq(l, r, _) => (Some(l), Some(r)),
            _ => (None, None),
        };
        l.into_iter().chain(r).filter_map(|a| match a {
            AExpr::Var(x, _) => Some(x),
            AExpr::Num(..) => None,
        })
    }

    fn strip(&mut self) {
        match self {
            BExpr::True(s) | BExpr::False(s) => *s = Span::default(),
            BExpr::Eq(l, r, s) | BExpr::Neq(l, r, s) => {
                l.strip();
                r.strip();
                *s = Span::default();
            }
        }
    }
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::DecLap(_, s)
            | Stmt::Update(_, s)
            | Stmt::Assign(_, _, s)
            | Stmt::Guarded(_, _, s)
            | Stmt::Seq(_, _, s) => *s,
        }
    }

    /// Builds the right-associated sequence `s1; (s2; (...; sn))`.
    ///
    /// Returns `None` for an empty list.
    pub fn seq(stmts: Vec<Stmt>) -> Option<Stmt> {
        let mut iter = stmts.into_iter().rev();
        let last = iter.next()?;
        Some(iter.fold(last, |rest, first| {
            let span = first.span().to(rest.span());
            Stmt::Seq(Box::new(first), Box::new(rest), span)
        }))
    }

    /// Flattens nested top-level `Seq` nodes into a statement list.
    pub fn flatten(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(s) = stack.pop() {
            match s {
                Stmt::Seq(a, b, _) => {
                    stack.push(b);
                    stack.push(a);
                }
                other => out.push(other),
            }
        }
        out
    }

    /// Every variable mentioned anywhere in the statement, read or written.
    pub fn vars(&self) -> Vec<&Ident> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a Ident>) {
        match self {
            Stmt::DecLap(x, _) | Stmt::Update(x, _) => out.push(x),
            Stmt::Assign(x, a, _) => {
                out.push(x);
                if let AExpr::Var(y, _) = a {
                    out.push(y);
                }
            }
            Stmt::Guarded(b, s, _) => {
                out.extend(b.vars());
                s.collect_vars(out);
            }
            Stmt::Seq(a, b, _) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    fn strip(&mut self) {
        match self {
            Stmt::DecLap(_, s) | Stmt::Update(_, s) => *s = Span::default(),
            Stmt::Assign(_, a, s) => {
                a.strip();
                *s = Span::default();
            }
            Stmt::Guarded(b, body, s) => {
                b.strip();
                body.strip();
                *s = Span::default();
            }
            Stmt::Seq(a, b, s) => {
                a.strip();
                b.strip();
                *s = Span::default();
            }
        }
    }

    /// Copy with every span reset, for structural comparison.
    pub fn without_spans(&self) -> Stmt {
        let mut s = self.clone();
        s.strip();
        s
    }
}

impl Program {
    /// Copy with every span reset, so two programs parsed from differently
    /// formatted text compare equal when their structure is the same.
    pub fn without_spans(&self) -> Program {
        let mut p = self.clone();
        for a in &mut p.agents {
            a.span = Span::default();
        }
        for d in &mut p.decls {
            d.span = Span::default();
        }
        for m in &mut p.places {
            m.span = Span::default();
            m.body.strip();
        }
        p
    }
}
