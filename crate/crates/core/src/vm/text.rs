//! Canonical code text: `(WAIT i <instrs>, <mp>)` per measuring place, blocks
//! separated by a blank line.

use thiserror::Error;

use super::instr::{CodeBlock, CompiledUnit, EventSource, Instr};
use crate::MpId;

fn write_instrs(code: &[Instr], out: &mut String) {
    for (i, instr) in code.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        match instr {
            Instr::Push(n) => {
                out.push_str("PUSH ");
                out.push_str(&n.to_string());
            }
            Instr::True => out.push_str("TRUE"),
            Instr::False => out.push_str("FALSE"),
            Instr::Eq => out.push_str("EQ"),
            Instr::Neq => out.push_str("NEQ"),
            Instr::Dec => out.push_str("DEC"),
            Instr::Wait => out.push_str("WAIT i"),
            Instr::Fetch(x) => {
                out.push_str("FETCH ");
                out.push_str(x);
            }
            Instr::FetchSrc(src) => {
                out.push_str("FETCH ");
                out.push_str(&src.to_string());
            }
            Instr::Store(x) => {
                out.push_str("STORE ");
                out.push_str(x);
            }
            Instr::Noop => out.push_str("NOOP"),
            Instr::Branch(a, b) => {
                out.push_str("BRANCH( ");
                write_instrs(a, out);
                out.push_str(", ");
                write_instrs(b, out);
                out.push(')');
            }
        }
    }
}

pub fn serialize_block(block: &CodeBlock) -> String {
    let mut out = String::from("(");
    write_instrs(&block.code, &mut out);
    out.push_str(", ");
    out.push_str(&block.mp.to_string());
    out.push(')');
    out
}

pub fn serialize_code(unit: &CompiledUnit) -> String {
    let mut out = String::new();
    for (i, block) in unit.blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&serialize_block(block));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct CodeFormatError {
    pub position: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, CodeFormatError> {
        let before = &self.text[..self.pos];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Err(CodeFormatError { position: self.pos, line, column, message: message.into() })
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), CodeFormatError> {
        self.skip_ws();
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    /// A run of characters up to whitespace or one of `(),`.
    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let rest = self.rest();
        let len = rest.find(|c: char| c.is_whitespace() || matches!(c, '(' | ')' | ',')).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn integer(&mut self) -> Result<i64, CodeFormatError> {
        let start = self.pos;
        let w = self.word();
        w.parse().or_else(|_| {
            self.pos = start;
            self.skip_ws();
            self.err(format!("expected integer, found `{w}`"))
        })
    }

    fn instrs(&mut self) -> Result<Vec<Instr>, CodeFormatError> {
        let mut code = Vec::new();
        loop {
            self.skip_ws();
            match self.rest().chars().next() {
                Some(',' | ')') => return Ok(code),
                None => return self.err("unexpected end of code"),
                _ => code.push(self.instr()?),
            }
        }
    }

    fn instr(&mut self) -> Result<Instr, CodeFormatError> {
        let start = self.pos;
        let op = self.word();
        Ok(match op {
            "PUSH" => Instr::Push(self.integer()?),
            "TRUE" => Instr::True,
            "FALSE" => Instr::False,
            "EQ" => Instr::Eq,
            "NEQ" => Instr::Neq,
            "DEC" => Instr::Dec,
            "NOOP" => Instr::Noop,
            "WAIT" => {
                if self.word() != "i" {
                    return self.err("expected `i` after WAIT");
                }
                Instr::Wait
            }
            "FETCH" => {
                self.skip_ws();
                if self.eat("accessfile(\"") {
                    let Some(end) = self.rest().find('"') else {
                        return self.err("unterminated file name");
                    };
                    let file = self.rest()[..end].to_string();
                    self.pos += end + 1;
                    self.expect(")")?;
                    Instr::FetchSrc(EventSource::AccessFile(file))
                } else if self.eat("connect(") {
                    let Some(end) = self.rest().find(')') else {
                        return self.err("unterminated connect operand");
                    };
                    let ip = self.rest()[..end].trim().to_string();
                    self.pos += end + 1;
                    Instr::FetchSrc(EventSource::Connect(ip))
                } else {
                    Instr::Fetch(self.name()?)
                }
            }
            "STORE" => Instr::Store(self.name()?),
            "BRANCH" => {
                self.expect("(")?;
                let then_code = self.instrs()?;
                self.expect(",")?;
                let else_code = self.instrs()?;
                self.expect(")")?;
                Instr::Branch(then_code, else_code)
            }
            "" => return self.err("expected instruction"),
            other => {
                self.pos = start;
                self.skip_ws();
                return self.err(format!("unknown instruction `{other}`"));
            }
        })
    }

    fn name(&mut self) -> Result<String, CodeFormatError> {
        let w = self.word();
        if w.is_empty() {
            self.err("expected variable name")
        } else {
            Ok(w.to_string())
        }
    }
}

/// Parses text in the format produced by [`serialize_code`]. Whitespace
/// between tokens is free-form.
pub fn parse_code(text: &str) -> Result<CompiledUnit, CodeFormatError> {
    let mut cur = Cursor { text, pos: 0 };
    let mut blocks = Vec::new();
    loop {
        cur.skip_ws();
        if cur.rest().is_empty() {
            break;
        }
        cur.expect("(")?;
        let code = cur.instrs()?;
        cur.expect(",")?;
        let mp_at = cur.pos;
        let mp = cur.integer()?;
        let mp = match u32::try_from(mp) {
            Ok(v) if v >= 1 => MpId(v),
            _ => {
                cur.pos = mp_at;
                return cur.err(format!("invalid measuring place {mp}"));
            }
        };
        cur.expect(")")?;
        blocks.push(CodeBlock { mp, code });
    }
    if blocks.is_empty() {
        return cur.err("no code blocks");
    }
    Ok(CompiledUnit { blocks })
}
