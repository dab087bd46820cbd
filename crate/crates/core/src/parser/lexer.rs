//! Hand-written lexer for the ADL. Produces a flat token stream with spans;
//! `//` line comments are skipped.

use super::{Diagnostic, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword(Keyword),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semicolon,
    Colon,
    Comma,
    Dot,
    Pipe,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Architecture,
    Type,
    Extends,
    Sensor,
    Source,
    Pulled,
    With,
    Context,
    Contract,
    On,
    Push,
    Pull,
    Get,
    Always,
    Maybe,
    No,
    Publish,
    Controller,
    Do,
    Action,
    Actuator,
    SelfWord,
}

impl Keyword {
    fn from_str(s: &str) -> Option<Keyword> {
        Some(match s {
            "architecture" => Keyword::Architecture,
            "type" => Keyword::Type,
            "extends" => Keyword::Extends,
            "sensor" => Keyword::Sensor,
            "source" => Keyword::Source,
            "pulled" => Keyword::Pulled,
            "with" => Keyword::With,
            "context" => Keyword::Context,
            "contract" => Keyword::Contract,
            "on" => Keyword::On,
            "push" => Keyword::Push,
            "pull" => Keyword::Pull,
            "get" => Keyword::Get,
            "always" => Keyword::Always,
            "maybe" => Keyword::Maybe,
            "no" => Keyword::No,
            "publish" => Keyword::Publish,
            "controller" => Keyword::Controller,
            "do" => Keyword::Do,
            "action" => Keyword::Action,
            "actuator" => Keyword::Actuator,
            "self" => Keyword::SelfWord,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Keyword::Architecture => "architecture",
            Keyword::Type => "type",
            Keyword::Extends => "extends",
            Keyword::Sensor => "sensor",
            Keyword::Source => "source",
            Keyword::Pulled => "pulled",
            Keyword::With => "with",
            Keyword::Context => "context",
            Keyword::Contract => "contract",
            Keyword::On => "on",
            Keyword::Push => "push",
            Keyword::Pull => "pull",
            Keyword::Get => "get",
            Keyword::Always => "always",
            Keyword::Maybe => "maybe",
            Keyword::No => "no",
            Keyword::Publish => "publish",
            Keyword::Controller => "controller",
            Keyword::Do => "do",
            Keyword::Action => "action",
            Keyword::Actuator => "actuator",
            Keyword::SelfWord => "self",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

pub fn lex(input: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = input.chars().peekable();

    macro_rules! bump {
        ($c:expr) => {
            if $c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        };
    }

    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            bump!(c);
            continue;
        }
        if c == '/' {
            let start = Span::new(line, col, 1);
            chars.next();
            bump!(c);
            if chars.peek() == Some(&'/') {
                while let Some(&c2) = chars.peek() {
                    if c2 == '\n' {
                        break;
                    }
                    chars.next();
                    bump!(c2);
                }
                continue;
            }
            errors.push(Diagnostic::error("unexpected character `/`", start));
            continue;
        }
        let span1 = Span::new(line, col, 1);
        let punct = match c {
            '{' => Some(TokenKind::LBrace),
            '}' => Some(TokenKind::RBrace),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            ';' => Some(TokenKind::Semicolon),
            ':' => Some(TokenKind::Colon),
            ',' => Some(TokenKind::Comma),
            '.' => Some(TokenKind::Dot),
            '|' => Some(TokenKind::Pipe),
            _ => None,
        };
        if let Some(kind) = punct {
            tokens.push(Token {
                kind,
                text: c.to_string(),
                span: span1,
            });
            chars.next();
            bump!(c);
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start_line = line;
            let start_col = col;
            let mut word = String::new();
            while let Some(&c2) = chars.peek() {
                if c2.is_ascii_alphanumeric() || c2 == '_' {
                    word.push(c2);
                    chars.next();
                    bump!(c2);
                } else {
                    break;
                }
            }
            let span = Span::new(start_line, start_col, word.len() as u32);
            let kind = match Keyword::from_str(&word) {
                Some(kw) => TokenKind::Keyword(kw),
                None => TokenKind::Ident,
            };
            tokens.push(Token {
                kind,
                text: word,
                span,
            });
            continue;
        }
        errors.push(Diagnostic::error(
            format!("unexpected character `{c}`"),
            span1,
        ));
        chars.next();
        bump!(c);
    }

    if errors.is_empty() {
        tokens.push(Token {
            kind: TokenKind::Eof,
            text: String::new(),
            span: Span::new(line, col, 0),
        });
        Ok(tokens)
    } else {
        Err(errors)
    }
}
