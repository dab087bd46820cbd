//! Line-oriented scenario files driving the simulator:
//!
//! ```text
//! # comment
//! publish AccessLogReader.line "10.0.0.1 - GET /index.html"
//! pull IP2Profile ("10.0.0.1")
//! ```
//!
//! Literal types are ascribed from the architecture: stimulus values take the
//! source's declared type, pull arguments the declared request parameters.

use super::trace::Value;
use crate::model::{Architecture, ComponentId, SourceRef};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Publish {
        source: SourceRef,
        value: Value,
    },
    Pull {
        target: ComponentId,
        args: Vec<Value>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scenario {
    pub steps: Vec<Step>,
}

impl Scenario {
    pub fn publish(mut self, source: SourceRef, value: Value) -> Self {
        self.steps.push(Step::Publish { source, value });
        self
    }

    pub fn pull(mut self, target: impl Into<String>, args: Vec<Value>) -> Self {
        self.steps.push(Step::Pull {
            target: ComponentId::new(target),
            args,
        });
        self
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ScenarioError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError {
        line,
        message: message.into(),
    }
}

/// Parse and validate a scenario against an architecture.
pub fn parse_scenario(text: &str, arch: &Architecture) -> Result<Scenario, Vec<ScenarioError>> {
    let mut steps = Vec::new();
    let mut errors = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let n = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_line(line, n, arch) {
            Ok(step) => steps.push(step),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(Scenario { steps })
    } else {
        Err(errors)
    }
}

fn parse_line(line: &str, n: usize, arch: &Architecture) -> Result<Step, ScenarioError> {
    let (verb, rest) = line.split_once(char::is_whitespace).ok_or_else(|| {
        err(
            n,
            "expected `publish <Sensor>.<source> <literal>` or `pull <Operator> (<literals>)`",
        )
    })?;
    let rest = rest.trim();
    match verb {
        "publish" => {
            let (target, literal) = rest
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(n, "expected a literal after the source reference"))?;
            let (sensor, source_name) = target
                .split_once('.')
                .ok_or_else(|| err(n, format!("`{target}` is not a `Sensor.source` reference")))?;
            let source = SourceRef::new(sensor, source_name);
            let decl = arch
                .source(&source)
                .ok_or_else(|| err(n, format!("unknown source `{source}`")))?;
            let (text, remainder) =
                take_literal(literal.trim()).ok_or_else(|| err(n, "malformed literal"))?;
            if !remainder.trim().is_empty() {
                return Err(err(n, "unexpected trailing input after the literal"));
            }
            Ok(Step::Publish {
                source,
                value: Value::typed(decl.value_type.clone(), text),
            })
        }
        "pull" => {
            let (target, args_text) = match rest.split_once(char::is_whitespace) {
                Some((t, a)) => (t, a.trim()),
                None => (rest, ""),
            };
            let target_id = ComponentId::new(target);
            let op = arch
                .context(&target_id)
                .ok_or_else(|| err(n, format!("unknown context operator `{target}`")))?;
            let literals = parse_arg_list(args_text).map_err(|m| err(n, m))?;
            let params = op.pull_args();
            if params.len() != literals.len() {
                return Err(err(
                    n,
                    format!(
                        "pull of {target} with {} arguments where {} are declared",
                        literals.len(),
                        params.len()
                    ),
                ));
            }
            let args = params
                .iter()
                .zip(literals)
                .map(|(ty, text)| Value::typed(ty.clone(), text))
                .collect();
            Ok(Step::Pull {
                target: target_id,
                args,
            })
        }
        other => Err(err(n, format!("unknown directive `{other}`"))),
    }
}

fn parse_arg_list(text: &str) -> Result<Vec<String>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let inner = text
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or("pull arguments must be parenthesized")?;
    let mut out = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let (lit, remainder) = take_literal(rest).ok_or("malformed literal")?;
        out.push(lit);
        rest = remainder.trim();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim();
            if rest.is_empty() {
                return Err("trailing comma in argument list".to_string());
            }
        } else if !rest.is_empty() {
            return Err("expected `,` between arguments".to_string());
        }
    }
    Ok(out)
}

/// A quoted string with `\"` and `\\` escapes, or a bare token without
/// whitespace, commas or parentheses. Returns the literal and the remainder.
fn take_literal(text: &str) -> Option<(String, &str)> {
    if let Some(rest) = text.strip_prefix('"') {
        let mut out = String::new();
        let mut chars = rest.char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '\\' => match chars.next() {
                    Some((_, '"')) => out.push('"'),
                    Some((_, '\\')) => out.push('\\'),
                    Some((_, 'n')) => out.push('\n'),
                    _ => return None,
                },
                '"' => return Some((out, &rest[i + 1..])),
                other => out.push(other),
            }
        }
        None
    } else {
        let end = text
            .find(|c: char| c.is_whitespace() || c == ',' || c == '(' || c == ')')
            .unwrap_or(text.len());
        if end == 0 {
            return None;
        }
        Some((text[..end].to_string(), &text[end..]))
    }
}
