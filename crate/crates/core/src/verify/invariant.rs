//! Interaction invariants over the architecture's data flow, in two forms:
//! response (`always p leadsto q`) and absence (`never p`). Predicates name
//! trace events: a source publication, an operator activation or an actuator
//! action.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Architecture, ComponentId, SourceRef};
use crate::sim::Event;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "predicate")]
pub enum Predicate {
    SourcePublished {
        source: SourceRef,
    },
    OperatorActivated {
        operator: ComponentId,
    },
    ActionInvoked {
        actuator: ComponentId,
        action: String,
    },
}

impl Predicate {
    pub fn matches_event(&self, event: &Event) -> bool {
        match (self, event) {
            (Predicate::SourcePublished { source }, Event::SourcePublished { source: s, .. }) => {
                source == s
            }
            (
                Predicate::OperatorActivated { operator },
                Event::OperatorActivated { operator: o, .. },
            ) => operator == o,
            (
                Predicate::ActionInvoked { actuator, action },
                Event::ActionInvoked {
                    actuator: a,
                    action: act,
                    ..
                },
            ) => actuator == a && action == act,
            _ => false,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::SourcePublished { source } => write!(f, "publish({source})"),
            Predicate::OperatorActivated { operator } => write!(f, "activated({operator})"),
            Predicate::ActionInvoked { actuator, action } => {
                write!(f, "action({actuator}.{action})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "form")]
pub enum Invariant {
    /// Whenever the trigger occurs, the goal eventually occurs.
    Response { trigger: Predicate, goal: Predicate },
    /// The predicate never occurs.
    Never(Predicate),
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Invariant::Response { trigger, goal } => {
                write!(f, "always {trigger} leadsto {goal}")
            }
            Invariant::Never(pred) => write!(f, "never {pred}"),
        }
    }
}

/// Does a finite complete trace satisfy the invariant? For a response form
/// every trigger occurrence must be followed (or accompanied) by a goal
/// occurrence.
pub fn satisfied_by(invariant: &Invariant, events: &[Event]) -> bool {
    match invariant {
        Invariant::Never(pred) => !events.iter().any(|e| pred.matches_event(e)),
        Invariant::Response { trigger, goal } => {
            for (i, e) in events.iter().enumerate() {
                if trigger.matches_event(e)
                    && !events[i..].iter().any(|later| goal.matches_event(later))
                {
                    return false;
                }
            }
            true
        }
    }
}

/// Parse one invariant line: `always <pred> leadsto <pred>` or
/// `never <pred>`, with predicates `publish(Sensor.source)`,
/// `activated(Component)` and `action(Actuator.action)`.
pub fn parse_invariant(line: &str, arch: &Architecture) -> Result<Invariant, String> {
    let line = line.trim();
    if let Some(rest) = line.strip_prefix("always ") {
        let (lhs, rhs) = rest
            .split_once(" leadsto ")
            .ok_or_else(|| "expected `always <pred> leadsto <pred>`".to_string())?;
        Ok(Invariant::Response {
            trigger: parse_predicate(lhs.trim(), arch)?,
            goal: parse_predicate(rhs.trim(), arch)?,
        })
    } else if let Some(rest) = line.strip_prefix("never ") {
        Ok(Invariant::Never(parse_predicate(rest.trim(), arch)?))
    } else {
        Err("expected `always <pred> leadsto <pred>` or `never <pred>`".to_string())
    }
}

/// Parse an invariant file: one invariant per line, `#` comments and blank
/// lines ignored.
pub fn parse_invariants(text: &str, arch: &Architecture) -> Result<Vec<Invariant>, Vec<String>> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_invariant(line, arch) {
            Ok(inv) => out.push(inv),
            Err(e) => errors.push(format!("line {}: {e}", idx + 1)),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

fn parse_predicate(text: &str, arch: &Architecture) -> Result<Predicate, String> {
    let (head, rest) = text
        .split_once('(')
        .ok_or_else(|| format!("malformed predicate `{text}`"))?;
    let inner = rest
        .strip_suffix(')')
        .ok_or_else(|| format!("missing `)` in predicate `{text}`"))?
        .trim();
    match head.trim() {
        "publish" => {
            let (sensor, source) = inner
                .split_once('.')
                .ok_or_else(|| format!("`{inner}` is not a `Sensor.source` reference"))?;
            let r = SourceRef::new(sensor, source);
            if arch.source(&r).is_none() {
                return Err(format!("unknown source `{r}`"));
            }
            Ok(Predicate::SourcePublished { source: r })
        }
        "activated" => {
            let id = ComponentId::new(inner);
            match arch.kind_of(&id) {
                Some(crate::model::ComponentKind::Context)
                | Some(crate::model::ComponentKind::Controller) => {
                    Ok(Predicate::OperatorActivated { operator: id })
                }
                Some(_) => Err(format!("`{inner}` is not a context or control operator")),
                None => Err(format!("unknown component `{inner}`")),
            }
        }
        "action" => {
            let (actuator, action) = inner
                .split_once('.')
                .ok_or_else(|| format!("`{inner}` is not an `Actuator.action` reference"))?;
            let id = ComponentId::new(actuator);
            let declared = arch
                .actuator(&id)
                .map(|a| a.actions.iter().any(|x| x.name == action))
                .unwrap_or(false);
            if !declared {
                return Err(format!("unknown action `{inner}`"));
            }
            Ok(Predicate::ActionInvoked {
                actuator: id,
                action: action.to_string(),
            })
        }
        other => Err(format!("unknown predicate `{other}`")),
    }
}
