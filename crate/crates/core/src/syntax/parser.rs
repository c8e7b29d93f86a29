use super::ast::*;
use super::lexer::tokenize;
use super::token::{Token, TokenKind};
use crate::diagnostic::{codes, Diagnostic, Span};
use crate::{AgentId, MpId};

/// Marker for "a diagnostic was recorded, resynchronise".
struct Recover;

type PResult<T> = Result<T, Recover>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof: Span,
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn span(&self) -> Span {
        self.tokens.get(self.pos).map_or(self.eof, |t| t.span)
    }

    fn advance(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.peek() == Some(kind)
    }

    fn unexpected<T>(&mut self, expected: &[&str]) -> PResult<T> {
        let expected: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
        let diag = match self.tokens.get(self.pos) {
            Some(tok) => {
                Diagnostic::error(codes::UNEXPECTED_TOKEN, format!("unexpected {}", tok.kind.describe()), tok.span)
            }
            None => Diagnostic::error(codes::UNEXPECTED_EOF, "unexpected end of input", self.eof),
        };
        self.diags.push(diag.with_expected(expected));
        Err(Recover)
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<Span> {
        if self.at(&kind) {
            let span = self.span();
            self.pos += 1;
            Ok(span)
        } else {
            self.unexpected(&[&kind.describe()])
        }
    }

    fn expect_int(&mut self) -> PResult<(i64, Span)> {
        match self.peek() {
            Some(&TokenKind::Int(n)) => {
                let span = self.span();
                self.pos += 1;
                Ok((n, span))
            }
            _ => self.unexpected(&["integer"]),
        }
    }

    fn expect_ident(&mut self) -> PResult<(Ident, Span)> {
        match self.peek() {
            Some(TokenKind::Ident(name)) => {
                let ident = Ident::new(name.clone());
                let span = self.span();
                self.pos += 1;
                Ok((ident, span))
            }
            _ => self.unexpected(&["identifier"]),
        }
    }

    /// Integer used as an mp or agent number; must fit u32 and be >= 1.
    fn expect_number(&mut self, what: &str) -> PResult<u32> {
        let (n, span) = self.expect_int()?;
        match u32::try_from(n) {
            Ok(v) if v >= 1 => Ok(v),
            _ => {
                self.diags.push(Diagnostic::error(
                    codes::INVALID_NUMBER,
                    format!("{what} number must be between 1 and {}, found {n}", u32::MAX),
                    span,
                ));
                Ok(n.clamp(1, u32::MAX as i64) as u32)
            }
        }
    }

    /// Skips to just past the next `;`, or up to (not past) a `}` / `mp`.
    fn sync_statement(&mut self) {
        while let Some(kind) = self.peek() {
            match kind {
                TokenKind::Semi => {
                    self.pos += 1;
                    return;
                }
                TokenKind::RBrace | TokenKind::Mp => return,
                _ => self.pos += 1,
            }
        }
    }

    /// Skips past the next `}` or up to the next `mp`.
    fn sync_place(&mut self) {
        while let Some(kind) = self.peek() {
            match kind {
                TokenKind::RBrace => {
                    self.pos += 1;
                    return;
                }
                TokenKind::Mp => return,
                _ => self.pos += 1,
            }
        }
    }

    fn program(&mut self) -> Program {
        let mut agents = Vec::new();
        while matches!(self.peek(), Some(TokenKind::Int(_))) {
            match self.agent() {
                Ok(a) => agents.push(a),
                Err(Recover) => self.sync_statement(),
            }
        }

        let mut decls = Vec::new();
        while self.at(&TokenKind::Var) {
            match self.decl() {
                Ok(d) => decls.push(d),
                Err(Recover) => self.sync_statement(),
            }
        }

        let mut places = Vec::new();
        while self.peek().is_some() {
            if self.at(&TokenKind::Mp) {
                if let Ok(m) = self.place() {
                    places.push(m);
                }
            } else {
                let expected: &[&str] = match (places.is_empty(), decls.is_empty()) {
                    (true, true) => &["integer", "`var`", "`mp`"],
                    (true, false) => &["`var`", "`mp`"],
                    (false, _) => &["`mp`"],
                };
                let _ = self.unexpected::<()>(expected);
                self.pos += 1;
                self.sync_place();
            }
        }

        if places.is_empty() && self.diags.is_empty() {
            self.diags.push(
                Diagnostic::error(codes::NO_MEASURING_PLACE, "a program needs at least one measuring place", self.eof)
                    .with_expected(vec!["`mp`".into()]),
            );
        }

        Program { agents, decls, places }
    }

    fn agent(&mut self) -> PResult<AgentDecl> {
        let start = self.span();
        let number = AgentId(self.expect_number("agent")?);
        let (kind, source) = match self.advance().map(|t| (t.kind, t.span)) {
            Some((TokenKind::Manual, _)) => match self.advance().map(|t| t.kind) {
                Some(TokenKind::File(f)) => (AgentKind::Manual, f),
                _ => {
                    self.pos -= 1;
                    return self.unexpected(&["quoted file name"]);
                }
            },
            Some((TokenKind::Auto, _)) => match self.advance().map(|t| (t.kind, t.span)) {
                Some((TokenKind::Ip(ip), span)) => {
                    if !valid_ipv4(&ip) {
                        self.diags.push(Diagnostic::error(
                            codes::INVALID_IP,
                            format!("`{ip}` is not a valid IPv4 address (octets must be 0-255)"),
                            span,
                        ));
                    }
                    (AgentKind::Auto, ip)
                }
                _ => {
                    self.pos -= 1;
                    return self.unexpected(&["IPv4 address"]);
                }
            },
            _ => {
                self.pos -= 1;
                return self.unexpected(&["`manual`", "`auto`"]);
            }
        };
        let end = self.expect(TokenKind::Semi)?;
        Ok(AgentDecl { number, kind, source, span: start.to(end) })
    }

    fn decl(&mut self) -> PResult<VarDecl> {
        let start = self.expect(TokenKind::Var)?;
        let (name, _) = self.expect_ident()?;
        self.expect(TokenKind::Assign)?;
        let (init, _) = self.expect_int()?;
        let end = self.expect(TokenKind::Semi)?;
        Ok(VarDecl { name, init, span: start.to(end) })
    }

    fn place(&mut self) -> PResult<MeasuringPlace> {
        let header = (|| {
            let start = self.expect(TokenKind::Mp)?;
            self.expect(TokenKind::LBracket)?;
            let mp = MpId(self.expect_number("measuring place")?);
            self.expect(TokenKind::RBracket)?;
            self.expect(TokenKind::Arrow)?;
            self.expect(TokenKind::Agnt)?;
            self.expect(TokenKind::LBracket)?;
            let agent = AgentId(self.expect_number("agent")?);
            self.expect(TokenKind::RBracket)?;
            let open = self.expect(TokenKind::LBrace)?;
            Ok((start, mp, agent, open))
        })();
        let (start, mp, agent, open) = match header {
            Ok(h) => h,
            Err(Recover) => {
                self.sync_place();
                return Err(Recover);
            }
        };

        let mut stmts = Vec::new();
        let mut failed = false;
        loop {
            match self.peek() {
                Some(TokenKind::RBrace) => break,
                None | Some(TokenKind::Mp) => {
                    let _ = self.unexpected::<()>(&["`}`"]);
                    return Err(Recover);
                }
                _ => match self.stmt() {
                    Ok(s) => stmts.push(s),
                    Err(Recover) => {
                        failed = true;
                        self.sync_statement();
                    }
                },
            }
        }
        let close = self.expect(TokenKind::RBrace)?;
        let span = start.to(close);
        match Stmt::seq(stmts) {
            Some(body) if !failed => Ok(MeasuringPlace { mp, agent, body, span }),
            Some(_) => Err(Recover),
            None => {
                if !failed {
                    self.diags.push(
                        Diagnostic::error(
                            codes::EMPTY_BLOCK,
                            format!("measuring place {mp} needs at least one statement"),
                            open.to(close),
                        )
                        .with_expected(vec![
                            "`dec`".into(),
                            "`upd`".into(),
                            "identifier".into(),
                            "`(`".into(),
                        ]),
                    );
                }
                Err(Recover)
            }
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.span();
        match self.peek() {
            Some(TokenKind::Dec) => {
                self.pos += 1;
                let (x, _) = self.expect_ident()?;
                let end = self.expect(TokenKind::Semi)?;
                Ok(Stmt::DecLap(x, start.to(end)))
            }
            Some(TokenKind::Upd) => {
                self.pos += 1;
                let (x, _) = self.expect_ident()?;
                let end = self.expect(TokenKind::Semi)?;
                Ok(Stmt::Update(x, start.to(end)))
            }
            Some(TokenKind::Ident(_)) => {
                let (x, _) = self.expect_ident()?;
                self.expect(TokenKind::Assign)?;
                let a = self.aexpr()?;
                let end = self.expect(TokenKind::Semi)?;
                Ok(Stmt::Assign(x, a, start.to(end)))
            }
            Some(TokenKind::LParen) => {
                self.pos += 1;
                let b = self.bexpr()?;
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::Arrow)?;
                let body = self.stmt()?;
                let span = start.to(body.span());
                Ok(Stmt::Guarded(b, Box::new(body), span))
            }
            _ => self.unexpected(&["`dec`", "`upd`", "identifier", "`(`"]),
        }
    }

    fn bexpr(&mut self) -> PResult<BExpr> {
        match self.peek() {
            Some(TokenKind::True) => {
                let span = self.span();
                self.pos += 1;
                Ok(BExpr::True(span))
            }
            Some(TokenKind::False) => {
                let span = self.span();
                self.pos += 1;
                Ok(BExpr::False(span))
            }
            Some(TokenKind::Int(_) | TokenKind::Ident(_)) => {
                let lhs = self.aexpr()?;
                let eq = match self.peek() {
                    Some(TokenKind::EqEq) => true,
                    Some(TokenKind::NotEq) => false,
                    _ => return self.unexpected(&["`==`", "`!=`"]),
                };
                self.pos += 1;
                let rhs = self.aexpr()?;
                let span = lhs.span().to(rhs.span());
                Ok(if eq { BExpr::Eq(lhs, rhs, span) } else { BExpr::Neq(lhs, rhs, span) })
            }
            _ => self.unexpected(&["`true`", "`false`", "integer", "identifier"]),
        }
    }

    fn aexpr(&mut self) -> PResult<AExpr> {
        match self.peek() {
            Some(&TokenKind::Int(n)) => {
                let span = self.span();
                self.pos += 1;
                Ok(AExpr::Num(n, span))
            }
            Some(TokenKind::Ident(name)) => {
                let x = Ident::new(name.clone());
                let span = self.span();
                self.pos += 1;
                Ok(AExpr::Var(x, span))
            }
            _ => self.unexpected(&["integer", "identifier"]),
        }
    }
}

pub(crate) fn valid_ipv4(text: &str) -> bool {
    let parts: Vec<&str> = text.split('.').collect();
    parts.len() == 4
        && parts.iter().all(|p| {
            !p.is_empty()
                && p.len() <= 3
                && p.bytes().all(|b| b.is_ascii_digit())
                && p.parse::<u16>().is_ok_and(|v| v <= 255)
        })
}

/// Parses EasyTime source text.
///
/// On failure every diagnostic found is returned; the parser resynchronises at
/// `;` and `}` so one mistake does not hide the next.
pub fn parse(source: &str) -> Result<Program, Vec<Diagnostic>> {
    let tokens = tokenize(source).map_err(|e| vec![e.to_diagnostic()])?;
    let eof = {
        let line = source.lines().count().max(1) as u32;
        let column = source.lines().last().map_or(0, |l| l.chars().count()) as u32 + 1;
        Span::new(source.len(), source.len(), line, column)
    };
    let mut parser = Parser { tokens, pos: 0, eof, diags: Vec::new() };
    let program = parser.program();
    if parser.diags.is_empty() {
        Ok(program)
    } else {
        Err(parser.diags)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIATHLON: &str = include_str!("../../examples/triathlon.et");

    #[test]
    fn triathlon_shape() {
        let p = parse(TRIATHLON).unwrap();
        assert_eq!(p.agents.len(), 2);
        assert_eq!(p.decls.len(), 11);
        assert_eq!(p.places.len(), 4);
        let ids: Vec<(u32, u32)> = p.places.iter().map(|m| (m.mp.0, m.agent.0)).collect();
        assert_eq!(ids, vec![(1, 1), (2, 1), (3, 2), (4, 2)]);
        assert_eq!(p.agents[0].kind, AgentKind::Manual);
        assert_eq!(p.agents[0].source, "abc.res");
        assert_eq!(p.agents[1].source, "192.168.225.100");
        assert_eq!(p.places[3].body.flatten().len(), 4);
    }

    #[test]
    fn minimal_program_without_agents_or_decls() {
        let p = parse("mp[1] -> agnt[1] { (true) -> upd SWIM; }").unwrap();
        assert!(p.agents.is_empty());
        assert!(p.decls.is_empty());
        assert_eq!(p.places.len(), 1);
        assert_eq!(
            p.places[0].body.without_spans(),
            Stmt::Guarded(
                BExpr::True(Span::default()),
                Box::new(Stmt::Update(Ident::new("SWIM"), Span::default())),
                Span::default()
            )
        );
    }

    #[test]
    fn empty_block_is_rejected() {
        let diags = parse("mp[1] -> agnt[1] { }").unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, codes::EMPTY_BLOCK);
        assert!(diags[0].expected.contains(&"`upd`".to_string()));
    }

    #[test]
    fn program_without_places_is_rejected() {
        let diags = parse("var X := 1;").unwrap_err();
        assert_eq!(diags[0].code, codes::NO_MEASURING_PLACE);
        assert!(parse("").is_err());
    }

    #[test]
    fn sequence_is_right_associated() {
        let p = parse("mp[1] -> agnt[1] { dec A; dec B; dec C; }").unwrap();
        match &p.places[0].body {
            Stmt::Seq(first, rest, _) => {
                assert!(matches!(**first, Stmt::DecLap(..)));
                assert!(matches!(**rest, Stmt::Seq(..)));
            }
            other => panic!("expected Seq, got {other:?}"),
        }
    }

    #[test]
    fn every_production_is_reachable() {
        let src = r#"
            1 manual "f.res";
            2 auto 10.0.0.1;
            var A := 3;
            var B := 0;
            mp[1] -> agnt[1] {
              dec A;
              upd B;
              B := A;
              B := 7;
              (true) -> dec A;
              (false) -> dec A;
              (A == 1) -> (B != A) -> upd B;
            }
            mp[2] -> agnt[2] { upd B; }
        "#;
        let p = parse(src).unwrap();
        let stmts = p.places[0].body.flatten();
        assert_eq!(stmts.len(), 7);
        assert!(matches!(stmts[2], Stmt::Assign(_, AExpr::Var(..), _)));
        assert!(matches!(stmts[3], Stmt::Assign(_, AExpr::Num(7, _), _)));
        assert!(matches!(stmts[5], Stmt::Guarded(BExpr::False(_), ..)));
        match stmts[6] {
            Stmt::Guarded(BExpr::Eq(..), inner, _) => {
                assert!(matches!(**inner, Stmt::Guarded(BExpr::Neq(..), ..)))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn recovers_and_reports_several_errors() {
        let src = "var A := ;\nvar B := 1;\nmp[1] -> agnt[1] {\n  upd ;\n  dec B;\n  B := ;\n}\n";
        let diags = parse(src).unwrap_err();
        assert_eq!(diags.len(), 3, "{diags:#?}");
        assert_eq!(diags[0].span.line, 1);
        assert_eq!(diags[1].span.line, 4);
        assert_eq!(diags[2].span.line, 6);
        assert!(diags.iter().all(|d| !d.expected.is_empty()));
    }

    #[test]
    fn agent_kind_must_match_source_shape() {
        assert!(parse("1 manual 10.0.0.1; mp[1] -> agnt[1] { dec A; }").is_err());
        assert!(parse("1 auto \"f\"; mp[1] -> agnt[1] { dec A; }").is_err());
        let diags = parse("1 auto 10.0.0.256; mp[1] -> agnt[1] { dec A; }").unwrap_err();
        assert_eq!(diags[0].code, codes::INVALID_IP);
    }

    #[test]
    fn zero_ids_are_rejected() {
        let diags = parse("mp[0] -> agnt[1] { dec A; }").unwrap_err();
        assert_eq!(diags[0].code, codes::INVALID_NUMBER);
        let diags = parse("0 manual \"f\"; mp[1] -> agnt[1] { dec A; }").unwrap_err();
        assert_eq!(diags[0].code, codes::INVALID_NUMBER);
    }

    #[test]
    fn keywords_are_not_identifiers() {
        assert!(parse("var mp := 1; mp[1] -> agnt[1] { dec A; }").is_err());
    }

    #[test]
    fn sections_must_appear_in_order() {
        assert!(parse("var A := 1; 1 manual \"f\"; mp[1] -> agnt[1] { dec A; }").is_err());
        assert!(parse("mp[1] -> agnt[1] { dec A; } var A := 1;").is_err());
    }

    #[test]
    fn spans_cover_constructs() {
        let src = "var A := 1;\nmp[2] -> agnt[1] {\n  dec A;\n}";
        let p = parse(src).unwrap();
        let d = &p.decls[0];
        assert_eq!(&src[d.span.start..d.span.end], "var A := 1;");
        let m = &p.places[0];
        assert_eq!(&src[m.span.start..m.span.end], &src[12..]);
        assert_eq!((m.span.line, m.span.column), (2, 1));
    }
}
