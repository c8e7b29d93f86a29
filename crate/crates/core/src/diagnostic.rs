use std::fmt;

use serde::Serialize;

/// Source location of a construct: byte range plus the 1-based line/column of
/// its first character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn new(start: usize, end: usize, line: u32, column: u32) -> Self {
        Span { start, end, line, column }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn to(self, other: Span) -> Span {
        let (first, last) = if self.start <= other.start { (self, other) } else { (other, self) };
        Span { start: first.start, end: last.end.max(first.end), line: first.line, column: first.column }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Stable diagnostic codes.
pub mod codes {
    pub const UNDECLARED_VARIABLE: &str = "E001";
    pub const DUPLICATE_VARIABLE: &str = "E002";
    pub const DUPLICATE_AGENT: &str = "E003";
    pub const UNKNOWN_AGENT: &str = "E004";
    pub const DUPLICATE_MEASURING_PLACE: &str = "E005";
    pub const LEX_ERROR: &str = "E100";
    pub const UNEXPECTED_TOKEN: &str = "E101";
    pub const UNEXPECTED_EOF: &str = "E102";
    pub const EMPTY_BLOCK: &str = "E103";
    pub const NO_MEASURING_PLACE: &str = "E104";
    pub const INVALID_IP: &str = "E105";
    pub const INVALID_NUMBER: &str = "E106";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    pub span: Span,
    /// Token descriptions the parser would have accepted; empty for semantic errors.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub expected: Vec<String>,
}

impl Diagnostic {
    pub fn error(code: &'static str, message: impl Into<String>, span: Span) -> Self {
        Diagnostic { severity: Severity::Error, code, message: message.into(), span, expected: Vec::new() }
    }

    pub fn with_expected(mut self, expected: Vec<String>) -> Self {
        self.expected = expected;
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {}[{}]: {}", self.span.line, self.span.column, sev, self.code, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
