use std::fmt;

use crate::diagnostic::Span;

pub const KEYWORDS: &[&str] = &["var", "mp", "agnt", "dec", "upd", "auto", "manual", "true", "false"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Var,
    Mp,
    Agnt,
    Dec,
    Upd,
    Auto,
    Manual,
    True,
    False,
    Semi,
    Assign,
    Arrow,
    EqEq,
    NotEq,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Int(i64),
    Ident(String),
    /// Dotted quad, kept as written.
    Ip(String),
    /// Quoted file path with the quotes stripped.
    File(String),
}

impl TokenKind {
    pub fn keyword(word: &str) -> Option<TokenKind> {
        Some(match word {
            "var" => TokenKind::Var,
            "mp" => TokenKind::Mp,
            "agnt" => TokenKind::Agnt,
            "dec" => TokenKind::Dec,
            "upd" => TokenKind::Upd,
            "auto" => TokenKind::Auto,
            "manual" => TokenKind::Manual,
            "true" => TokenKind::True,
            "false" => TokenKind::False,
            _ => return None,
        })
    }

    /// Short description used in "expected ..." messages.
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Int(_) => "integer".into(),
            TokenKind::Ident(_) => "identifier".into(),
            TokenKind::Ip(_) => "IPv4 address".into(),
            TokenKind::File(_) => "quoted file name".into(),
            other => format!("`{other}`"),
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Var => "var",
            TokenKind::Mp => "mp",
            TokenKind::Agnt => "agnt",
            TokenKind::Dec => "dec",
            TokenKind::Upd => "upd",
            TokenKind::Auto => "auto",
            TokenKind::Manual => "manual",
            TokenKind::True => "true",
            TokenKind::False => "false",
            TokenKind::Semi => ";",
            TokenKind::Assign => ":=",
            TokenKind::Arrow => "->",
            TokenKind::EqEq => "==",
            TokenKind::NotEq => "!=",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::Int(n) => return write!(f, "{n}"),
            TokenKind::Ident(s) | TokenKind::Ip(s) => return f.write_str(s),
            TokenKind::File(s) => return write!(f, "\"{s}\""),
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}
