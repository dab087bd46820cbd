//! Parser for the textual ADL: lexing, recursive descent parsing and name
//! resolution, plus the canonical pretty-printer.
//!
//! Parsing is reentrant and deterministic: identical input bytes yield an
//! identical [`Architecture`] or identical diagnostics.

mod format;
mod grammar;
mod lexer;
mod resolve;

pub use format::{format, format_basic};

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::model::Architecture;

/// Position of a diagnostic inside the source text. Lines and columns are
/// 1-based; `length` counts characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl Span {
    pub fn new(line: u32, column: u32, length: u32) -> Self {
        Span {
            line,
            column,
            length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

/// A positioned parse diagnostic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>, span: Span) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message: message.into(),
            span,
        }
    }

    /// Render as `path:line:col: severity: message`.
    pub fn render(&self, path: &str) -> String {
        format!(
            "{path}:{}:{}: {}: {}",
            self.span.line, self.span.column, self.severity, self.message
        )
    }
}

/// A UTF-8 source file, or an anonymous in-memory snippet.
#[derive(Debug, Clone)]
pub struct SourceText {
    pub path: PathBuf,
    pub content: String,
}

impl SourceText {
    pub fn new(path: impl Into<PathBuf>, content: impl Into<String>) -> Self {
        SourceText {
            path: path.into(),
            content: content.into(),
        }
    }

    pub fn inline(content: impl Into<String>) -> Self {
        SourceText::new("<input>", content)
    }

    pub fn load(path: impl Into<PathBuf>) -> std::io::Result<Self> {
        let path = path.into();
        let content = std::fs::read_to_string(&path)?;
        Ok(SourceText { path, content })
    }
}

/// Parse an ADL source into a fully resolved architecture, or the list of
/// diagnostics explaining why it is not one.
pub fn parse(src: &SourceText) -> Result<Architecture, Vec<Diagnostic>> {
    let tokens = lexer::lex(&src.content)?;
    let raw = grammar::parse_tokens(tokens)?;
    resolve::resolve(raw)
}

/// Convenience entry point for in-memory sources.
pub fn parse_str(content: &str) -> Result<Architecture, Vec<Diagnostic>> {
    parse(&SourceText::inline(content))
}
