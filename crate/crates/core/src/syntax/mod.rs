//! Concrete syntax: tokens, the recursive-descent parser and the pretty printer.

mod ast;
mod lexer;
mod parser;
mod pretty;
mod token;

pub use ast::{AExpr, AgentDecl, AgentKind, BExpr, Ident, MeasuringPlace, Program, Stmt, VarDecl};
pub use lexer::{tokenize, LexError};
pub use parser::parse;
pub use pretty::pretty_print;
#[cfg(test)]
pub(crate) use pretty::stmt_line;
pub use token::{Token, TokenKind, KEYWORDS};
