use thiserror::Error;

use super::token::{Token, TokenKind};
use crate::diagnostic::{codes, Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct LexError {
    pub line: u32,
    pub column: u32,
    pub offset: usize,
    pub found: Option<char>,
    pub message: String,
}

impl LexError {
    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::error(
            codes::LEX_ERROR,
            self.message.clone(),
            Span::new(self.offset, self.offset + self.found.map_or(0, char::len_utf8), self.line, self.column),
        )
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, found: Option<char>, message: impl Into<String>) -> LexError {
        LexError { line: self.line, column: self.column, offset: self.pos, found, message: message.into() }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(' ' | '\t' | '\r' | '\n') => {
                    self.bump();
                }
                Some('/') if self.peek_at(1) == Some('/') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        &self.src[start..self.pos]
    }

    fn next_token(&mut self) -> Result<Option<Token>, LexError> {
        self.skip_trivia();
        let Some(c) = self.peek() else { return Ok(None) };
        let (start, line, column) = (self.pos, self.line, self.column);

        let kind = match c {
            ';' => self.single(TokenKind::Semi),
            '(' => self.single(TokenKind::LParen),
            ')' => self.single(TokenKind::RParen),
            '{' => self.single(TokenKind::LBrace),
            '}' => self.single(TokenKind::RBrace),
            '[' => self.single(TokenKind::LBracket),
            ']' => self.single(TokenKind::RBracket),
            '\u{2192}' => self.single(TokenKind::Arrow),
            ':' | '-' | '=' | '!' => {
                let second = match c {
                    ':' | '=' | '!' => '=',
                    _ => '>',
                };
                if self.peek_at(1) != Some(second) {
                    return Err(self.error(Some(c), format!("unexpected character `{c}`")));
                }
                self.bump();
                self.bump();
                match c {
                    ':' => TokenKind::Assign,
                    '=' => TokenKind::EqEq,
                    '!' => TokenKind::NotEq,
                    _ => TokenKind::Arrow,
                }
            }
            '"' => {
                self.bump();
                let body_start = self.pos;
                loop {
                    match self.peek() {
                        Some('"') => break,
                        Some('\n') | None => {
                            return Err(LexError {
                                line,
                                column,
                                offset: start,
                                found: Some('"'),
                                message: "unterminated file name".into(),
                            })
                        }
                        Some(_) => {
                            self.bump();
                        }
                    }
                }
                let body = self.src[body_start..self.pos].to_string();
                self.bump();
                TokenKind::File(body)
            }
            c if c.is_ascii_digit() => {
                let first = self.digits();
                if self.peek() == Some('.') && matches!(self.peek_at(1), Some(d) if d.is_ascii_digit()) {
                    let mut groups = 1;
                    while self.peek() == Some('.') && matches!(self.peek_at(1), Some(d) if d.is_ascii_digit()) {
                        self.bump();
                        self.digits();
                        groups += 1;
                    }
                    if groups != 4 {
                        return Err(LexError {
                            line,
                            column,
                            offset: start,
                            found: Some(c),
                            message: format!("malformed IPv4 address `{}`", &self.src[start..self.pos]),
                        });
                    }
                    TokenKind::Ip(self.src[start..self.pos].to_string())
                } else {
                    let value = first.parse::<i64>().map_err(|_| LexError {
                        line,
                        column,
                        offset: start,
                        found: Some(c),
                        message: format!("integer literal `{first}` out of range"),
                    })?;
                    TokenKind::Int(value)
                }
            }
            c if c.is_ascii_alphabetic() => {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    self.bump();
                }
                let word = &self.src[start..self.pos];
                TokenKind::keyword(word).unwrap_or_else(|| TokenKind::Ident(word.to_string()))
            }
            other => return Err(self.error(Some(other), format!("unexpected character `{other}`"))),
        };

        Ok(Some(Token {
            kind,
            lexeme: self.src[start..self.pos].to_string(),
            span: Span::new(start, self.pos, line, column),
        }))
    }

    fn single(&mut self, kind: TokenKind) -> TokenKind {
        self.bump();
        kind
    }
}

/// Splits EasyTime source into tokens. Whitespace and `//` line comments are
/// skipped.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut lexer = Lexer { src: source, pos: 0, line: 1, column: 1 };
    let mut tokens = Vec::new();
    while let Some(tok) = lexer.next_token()? {
        tokens.push(tok);
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn declaration_line() {
        assert_eq!(
            kinds("var ROUND1 := 20;"),
            vec![
                TokenKind::Var,
                TokenKind::Ident("ROUND1".into()),
                TokenKind::Assign,
                TokenKind::Int(20),
                TokenKind::Semi
            ]
        );
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").unwrap().is_empty());
        assert!(tokenize("  \n// only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn auto_agent_line() {
        assert_eq!(
            kinds("2 auto 192.168.225.100;"),
            vec![TokenKind::Int(2), TokenKind::Auto, TokenKind::Ip("192.168.225.100".into()), TokenKind::Semi]
        );
    }

    #[test]
    fn file_token_strips_quotes_but_lexeme_keeps_them() {
        let toks = tokenize("1 manual \"abc.res\";").unwrap();
        assert_eq!(toks[2].kind, TokenKind::File("abc.res".into()));
        assert_eq!(toks[2].lexeme, "\"abc.res\"");
    }

    #[test]
    fn punctuation_and_positions() {
        let toks = tokenize("mp[1] -> agnt[2] {\n  (A != 3) -> dec A;\n}").unwrap();
        assert_eq!(toks[0].span.line, 1);
        let neq = toks.iter().find(|t| t.kind == TokenKind::NotEq).unwrap();
        assert_eq!((neq.span.line, neq.span.column), (2, 6));
        assert_eq!(kinds("→"), vec![TokenKind::Arrow]);
    }

    #[test]
    fn identifiers_are_case_sensitive_and_allow_underscores() {
        assert_eq!(
            kinds("Var var lap_2"),
            vec![TokenKind::Ident("Var".into()), TokenKind::Var, TokenKind::Ident("lap_2".into()),]
        );
    }

    #[test]
    fn rejects_foreign_characters() {
        let err = tokenize("var X := 1;\nvar Y := 2 + 3;").unwrap_err();
        assert_eq!((err.line, err.column, err.found), (2, 12, Some('+')));
        let err = tokenize("a = b").unwrap_err();
        assert_eq!(err.found, Some('='));
    }

    #[test]
    fn unterminated_file_name() {
        let err = tokenize("1 manual \"abc.res;\n").unwrap_err();
        assert_eq!((err.line, err.column), (1, 10));
        assert!(err.message.contains("unterminated"));
    }

    #[test]
    fn malformed_ip() {
        assert!(tokenize("2 auto 10.0.1;").is_err());
        assert!(tokenize("2 auto 10.0.0.1.5;").is_err());
    }
}
