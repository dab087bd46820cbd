//! Trace vocabulary of the simulator: typed values and the totally ordered
//! event record a run produces.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{ChildRef, ComponentId, SourceRef, TypeName};

/// A runtime value: a type tag over an opaque textual payload. The simulator
/// enforces flow shape, not value semantics, so payloads stay uninterpreted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Value {
    #[serde(rename = "type")]
    pub ty: TypeName,
    pub repr: String,
}

impl Value {
    pub fn new(ty: impl Into<String>, repr: impl Into<String>) -> Self {
        Value {
            ty: TypeName::new(ty),
            repr: repr.into(),
        }
    }

    pub fn typed(ty: TypeName, repr: impl Into<String>) -> Self {
        Value {
            ty,
            repr: repr.into(),
        }
    }

    /// Same payload under a different type tag.
    pub fn retag(&self, ty: TypeName) -> Value {
        Value {
            ty,
            repr: self.repr.clone(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({:?})", self.ty, self.repr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardReason {
    /// The callback outlived the activation that created it.
    Stale,
    /// The callback exceeded its invocation quota.
    QuotaExceeded,
}

impl fmt::Display for GuardReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuardReason::Stale => f.write_str("stale"),
            GuardReason::QuotaExceeded => f.write_str("quota-exceeded"),
        }
    }
}

/// One interaction event. `PullIssued`/`PullReturned` carry `None` as the
/// requester for external pull probes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "event")]
pub enum Event {
    SourcePublished {
        source: SourceRef,
        value: Value,
    },
    OperatorActivated {
        operator: ComponentId,
        contract: usize,
    },
    PullIssued {
        from: Option<ComponentId>,
        to: ChildRef,
        args: Vec<Value>,
    },
    PullReturned {
        from: Option<ComponentId>,
        to: ChildRef,
        value: Value,
    },
    ValuePublished {
        operator: ComponentId,
        value: Value,
    },
    ActionInvoked {
        actuator: ComponentId,
        action: String,
        args: Vec<Value>,
    },
    GuardViolation {
        operator: ComponentId,
        callback: String,
        reason: GuardReason,
    },
    HandlerFault {
        operator: ComponentId,
        message: String,
    },
}

fn args_list(args: &[Value]) -> String {
    let rendered: Vec<String> = args.iter().map(|v| v.to_string()).collect();
    format!("({})", rendered.join(", "))
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::SourcePublished { source, value } => {
                write!(f, "source-published {source} {value}")
            }
            Event::OperatorActivated { operator, contract } => {
                write!(f, "operator-activated {operator} contract={contract}")
            }
            Event::PullIssued { from, to, args } => {
                let from = from.as_ref().map(|c| c.to_string());
                let from = from.as_deref().unwrap_or("external");
                write!(f, "pull-issued {from} -> {to} {}", args_list(args))
            }
            Event::PullReturned { from, to, value } => {
                let from = from.as_ref().map(|c| c.to_string());
                let from = from.as_deref().unwrap_or("external");
                write!(f, "pull-returned {from} <- {to} {value}")
            }
            Event::ValuePublished { operator, value } => {
                write!(f, "value-published {operator} {value}")
            }
            Event::ActionInvoked {
                actuator,
                action,
                args,
            } => {
                write!(f, "action-invoked {actuator}.{action} {}", args_list(args))
            }
            Event::GuardViolation {
                operator,
                callback,
                reason,
            } => {
                write!(
                    f,
                    "guard-violation {operator} callback={callback} reason={reason}"
                )
            }
            Event::HandlerFault { operator, message } => {
                write!(f, "handler-fault {operator} {message:?}")
            }
        }
    }
}

/// The ordered record of interaction events produced by one run.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SimTrace {
    pub events: Vec<Event>,
}

impl SimTrace {
    /// One event per line, stable field order; suitable for golden files.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }

    /// One JSON record per line.
    pub fn machine_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn activations_of(&self, op: &ComponentId) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, Event::OperatorActivated { operator, .. } if operator == op))
            .count()
    }

    pub fn publications_of(&self, op: &ComponentId) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, Event::ValuePublished { operator, .. } if operator == op))
            .count()
    }
}
