//! The generated programming framework, as data: a manifest enumerating every
//! implementation obligation an architecture imposes (abstract methods,
//! calling methods, callbacks with their guard policies), a renderer for
//! human-readable stub skeletons, and a structural differ supporting
//! regeneration without losing track of existing implementations.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::check::{self, CheckReport};
use crate::denote::{self, DenoteError, SignatureDescriptor, TypeTerm};
use crate::model::{
    ActionDecl, ActivationCondition, Architecture, ChildRef, ComponentId, Emission, Order,
    SensorSource,
};

pub const MANIFEST_VERSION: u32 = 1;

/// Scope of a callback guard. Callbacks are valid only while the activation
/// that created them is still executing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardScope {
    HandlerLifetime,
}

/// Dynamic guard policy of one callback: scope plus an optional invocation
/// quota.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GuardPolicy {
    pub scope: GuardScope,
    /// Maximum invocations per activation; `None` means unlimited.
    pub max_invocations: Option<u32>,
}

impl GuardPolicy {
    pub fn unlimited() -> Self {
        GuardPolicy {
            scope: GuardScope::HandlerLifetime,
            max_invocations: None,
        }
    }

    pub fn bounded(max: u32) -> Self {
        GuardPolicy {
            scope: GuardScope::HandlerLifetime,
            max_invocations: Some(max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CallbackKind {
    Pull,
    Publish,
}

/// A callback obligation. Callbacks exist only for optional interactions:
/// data requirements and `maybe` emissions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CallbackEntry {
    pub name: String,
    pub kind: CallbackKind,
    pub signature: TypeTerm,
    pub guard: GuardPolicy,
    /// The pulled child for pull callbacks.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pulls: Option<ChildRef>,
}

/// What the calling method does with the handler result once the abstract
/// method returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PostAction {
    /// The returned value is pushed to all parents.
    PublishAlways,
    /// A value is pushed only if the handler invoked the publish callback.
    PublishOnCallback,
    /// The returned value goes back to the pulling parent only.
    ReturnToCaller,
    /// Nothing leaves the operator.
    None,
}

impl fmt::Display for PostAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PostAction::PublishAlways => "publish-always",
            PostAction::PublishOnCallback => "publish-on-callback",
            PostAction::ReturnToCaller => "return-to-caller",
            PostAction::None => "none",
        };
        f.write_str(s)
    }
}

/// The framework-side caller of one abstract method.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CallingMethod {
    /// Rendered activation condition, e.g. `push(AccessLogParser)` or `pull`.
    pub triggers: String,
    pub invokes: String,
    pub post_action: PostAction,
}

/// Obligations of one context operator: an abstract method and a calling
/// method per basic contract, plus the callbacks they may use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OperatorEntry {
    pub operator: ComponentId,
    pub abstract_methods: Vec<SignatureDescriptor>,
    pub callbacks: Vec<CallbackEntry>,
    pub calling_methods: Vec<CallingMethod>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ControllerEntry {
    pub controller: ComponentId,
    pub subscriptions: Vec<ComponentId>,
    pub orders: Vec<Order>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ActuatorEntry {
    pub actuator: ComponentId,
    pub actions: Vec<ActionDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SensorEntry {
    pub sensor: ComponentId,
    pub sources: Vec<SensorSource>,
}

/// Every implementation obligation derived from one architecture. Each
/// declared component has exactly one entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FrameworkManifest {
    pub manifest_version: u32,
    pub architecture_name: String,
    pub operators: Vec<OperatorEntry>,
    pub controllers: Vec<ControllerEntry>,
    pub actuators: Vec<ActuatorEntry>,
    pub sensors: Vec<SensorEntry>,
}

impl FrameworkManifest {
    pub fn operator(&self, id: &ComponentId) -> Option<&OperatorEntry> {
        self.operators.iter().find(|o| &o.operator == id)
    }

    /// Canonical JSON: sorted object keys, two-space indentation, trailing
    /// newline. Byte-stable across runs.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("manifest serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("manifest serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GenerateError {
    #[error("architecture fails its static checks; generation aborted")]
    ChecksFailed(CheckReport),
    #[error(transparent)]
    Denote(#[from] DenoteError),
}

/// Render an activation condition for calling-method triggers.
pub fn render_activation(activation: &ActivationCondition) -> String {
    match activation {
        ActivationCondition::PullSelf => "pull".to_string(),
        ActivationCondition::Push { terms } => {
            let rendered: Vec<String> = terms
                .iter()
                .map(|t| {
                    t.members
                        .iter()
                        .map(|m| m.to_string())
                        .collect::<Vec<_>>()
                        .join(" | ")
                })
                .collect();
            format!("push({})", rendered.join(", "))
        }
    }
}

fn post_action(activation: &ActivationCondition, emission: Emission) -> PostAction {
    match (activation, emission) {
        (_, Emission::Maybe) => PostAction::PublishOnCallback,
        (_, Emission::Always) => PostAction::PublishAlways,
        (ActivationCondition::PullSelf, Emission::Never) => PostAction::ReturnToCaller,
        (ActivationCondition::Push { .. }, Emission::Never) => PostAction::None,
    }
}

/// Generate the manifest for a checked architecture. Consistency or
/// determinacy failures abort generation.
pub fn generate_manifest(arch: &Architecture) -> Result<FrameworkManifest, GenerateError> {
    let report = CheckReport::merge([
        check::check_architecture_consistency(arch),
        check::check_determinacy(arch),
    ]);
    if !report.passed() {
        return Err(GenerateError::ChecksFailed(report));
    }

    let mut operators = Vec::new();
    for op in &arch.context_operators {
        let methods = denote::denote(op, arch)?;
        let mut callbacks: Vec<CallbackEntry> = Vec::new();
        let mut calling_methods = Vec::new();

        for (basic, method) in op.contract.basics.iter().zip(&methods) {
            for param in method.pull_callbacks() {
                let child = param.pulls.clone().expect("pull callbacks carry a child");
                if callbacks.iter().any(|c| c.pulls.as_ref() == Some(&child)) {
                    continue;
                }
                callbacks.push(CallbackEntry {
                    name: denote::callback_name(&child),
                    kind: CallbackKind::Pull,
                    signature: param.ty.clone(),
                    guard: GuardPolicy::unlimited(),
                    pulls: Some(child),
                });
            }
            if basic.emission == Emission::Maybe
                && !callbacks.iter().any(|c| c.kind == CallbackKind::Publish)
            {
                callbacks.push(CallbackEntry {
                    name: "Publish".to_string(),
                    kind: CallbackKind::Publish,
                    signature: TypeTerm::publish(op.value_type.clone()),
                    guard: GuardPolicy::bounded(1),
                    pulls: None,
                });
            }
            calling_methods.push(CallingMethod {
                triggers: render_activation(&basic.activation),
                invokes: method.name.clone(),
                post_action: post_action(&basic.activation, basic.emission),
            });
        }

        disambiguate_callback_names(&mut callbacks);
        operators.push(OperatorEntry {
            operator: op.id.clone(),
            abstract_methods: methods,
            callbacks,
            calling_methods,
        });
    }

    Ok(FrameworkManifest {
        manifest_version: MANIFEST_VERSION,
        architecture_name: arch.name.clone(),
        operators,
        controllers: arch
            .control_operators
            .iter()
            .map(|c| ControllerEntry {
                controller: c.id.clone(),
                subscriptions: c.subscriptions.clone(),
                orders: c.orders.clone(),
            })
            .collect(),
        actuators: arch
            .actuators
            .iter()
            .map(|a| ActuatorEntry {
                actuator: a.id.clone(),
                actions: a.actions.clone(),
            })
            .collect(),
        sensors: arch
            .sensors
            .iter()
            .map(|s| SensorEntry {
                sensor: s.id.clone(),
                sources: s.sources.clone(),
            })
            .collect(),
    })
}

/// Two sources of one sensor produce the same `PullFrom` base name; refine
/// such collisions with the capitalized source name.
fn disambiguate_callback_names(callbacks: &mut [CallbackEntry]) {
    let clashing: Vec<usize> = (0..callbacks.len())
        .filter(|&i| {
            callbacks
                .iter()
                .enumerate()
                .any(|(j, c)| j != i && c.name == callbacks[i].name)
        })
        .collect();
    for i in clashing {
        if let Some(ChildRef::Source(s)) = &callbacks[i].pulls {
            let mut refined = callbacks[i].name.clone();
            let mut chars = s.source.chars();
            if let Some(first) = chars.next() {
                refined.push(first.to_ascii_uppercase());
                refined.push_str(chars.as_str());
            }
            callbacks[i].name = refined;
        }
    }
}

/// Deterministic, human-readable listing of every obligation in a manifest.
pub fn render_stubs(m: &FrameworkManifest) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "architecture {}", m.architecture_name);
    let _ = writeln!(w, "manifest version {}", m.manifest_version);

    for op in &m.operators {
        let _ = writeln!(w);
        let _ = writeln!(w, "operator {}", op.operator);
        for method in &op.abstract_methods {
            let params: Vec<String> = method
                .params
                .iter()
                .map(|p| format!("{}: {}", p.name, p.ty.render()))
                .collect();
            let _ = writeln!(
                w,
                "  abstract {}({}) -> {}",
                method.name,
                params.join(", "),
                method.return_type.render()
            );
        }
        for cm in &op.calling_methods {
            let _ = writeln!(
                w,
                "  calling on {} invokes {} then {}",
                cm.triggers, cm.invokes, cm.post_action
            );
        }
        for cb in &op.callbacks {
            let what = match (&cb.kind, &cb.pulls) {
                (CallbackKind::Pull, Some(child)) => format!("pull {child}"),
                (CallbackKind::Pull, None) => "pull".to_string(),
                (CallbackKind::Publish, _) => "publish".to_string(),
            };
            let quota = match cb.guard.max_invocations {
                Some(n) => format!("max {n} per activation"),
                None => "unlimited".to_string(),
            };
            let _ = writeln!(
                w,
                "  callback {}: {} ({what}, {quota})",
                cb.name,
                cb.signature.render()
            );
        }
    }

    for c in &m.controllers {
        let _ = writeln!(w);
        let _ = writeln!(w, "controller {}", c.controller);
        for sub in &c.subscriptions {
            for order in &c.orders {
                let _ = writeln!(w, "  on push({sub}) do {order}");
            }
        }
    }

    for a in &m.actuators {
        let _ = writeln!(w);
        let _ = writeln!(w, "actuator {}", a.actuator);
        for action in &a.actions {
            let params: Vec<&str> = action.param_types.iter().map(|t| t.as_str()).collect();
            let _ = writeln!(w, "  action {}({})", action.name, params.join(", "));
        }
    }

    for s in &m.sensors {
        let _ = writeln!(w);
        let _ = writeln!(w, "sensor {}", s.sensor);
        for src in &s.sources {
            let _ = write!(w, "  source {} : {}", src.name, src.value_type);
            if !src.pull_params.is_empty() {
                let params: Vec<&str> = src.pull_params.iter().map(|t| t.as_str()).collect();
                let _ = write!(w, " pulled with ({})", params.join(", "));
            }
            let _ = writeln!(w);
        }
    }

    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffKind {
    Added,
    Removed,
    Changed,
}

impl fmt::Display for DiffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DiffKind::Added => "added",
            DiffKind::Removed => "removed",
            DiffKind::Changed => "changed",
        };
        f.write_str(s)
    }
}

/// One obligation the developer must add, remove or re-sign after a
/// regeneration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub kind: DiffKind,
    pub path: String,
}

impl fmt::Display for DiffEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind, self.path)
    }
}

/// Structural diff between two manifests. Entries are keyed by component and
/// obligation name, so reordering alone produces no diff.
pub fn diff_manifests(old: &FrameworkManifest, new: &FrameworkManifest) -> Vec<DiffEntry> {
    let mut out = Vec::new();

    diff_keyed(
        &mut out,
        "operator",
        &old.operators,
        &new.operators,
        |o| o.operator.to_string(),
        |out, path, o, n| {
            diff_keyed(
                out,
                &format!("{path}/method"),
                &o.abstract_methods,
                &n.abstract_methods,
                |m| m.name.clone(),
                |out, path, a, b| {
                    if a != b {
                        out.push(DiffEntry {
                            kind: DiffKind::Changed,
                            path: path.to_string(),
                        });
                    }
                },
                |_| Vec::new(),
            );
            diff_keyed(
                out,
                &format!("{path}/callback"),
                &o.callbacks,
                &n.callbacks,
                |c| c.name.clone(),
                |out, path, a, b| {
                    if a != b {
                        out.push(DiffEntry {
                            kind: DiffKind::Changed,
                            path: path.to_string(),
                        });
                    }
                },
                |_| Vec::new(),
            );
        },
        |o| {
            o.abstract_methods
                .iter()
                .map(|m| format!("method/{}", m.name))
                .chain(o.callbacks.iter().map(|c| format!("callback/{}", c.name)))
                .collect()
        },
    );

    diff_keyed(
        &mut out,
        "controller",
        &old.controllers,
        &new.controllers,
        |c| c.controller.to_string(),
        |out, path, a, b| {
            if a != b {
                out.push(DiffEntry {
                    kind: DiffKind::Changed,
                    path: path.to_string(),
                });
            }
        },
        |_| Vec::new(),
    );
    diff_keyed(
        &mut out,
        "actuator",
        &old.actuators,
        &new.actuators,
        |a| a.actuator.to_string(),
        |out, path, a, b| {
            if a != b {
                out.push(DiffEntry {
                    kind: DiffKind::Changed,
                    path: path.to_string(),
                });
            }
        },
        |a| {
            a.actions
                .iter()
                .map(|x| format!("action/{}", x.name))
                .collect()
        },
    );
    diff_keyed(
        &mut out,
        "sensor",
        &old.sensors,
        &new.sensors,
        |s| s.sensor.to_string(),
        |out, path, a, b| {
            if a != b {
                out.push(DiffEntry {
                    kind: DiffKind::Changed,
                    path: path.to_string(),
                });
            }
        },
        |s| {
            s.sources
                .iter()
                .map(|x| format!("source/{}", x.name))
                .collect()
        },
    );

    out
}

fn diff_keyed<T>(
    out: &mut Vec<DiffEntry>,
    section: &str,
    old: &[T],
    new: &[T],
    key: impl Fn(&T) -> String,
    compare: impl Fn(&mut Vec<DiffEntry>, &str, &T, &T),
    children_of_added: impl Fn(&T) -> Vec<String>,
) {
    for o in old {
        let k = key(o);
        if !new.iter().any(|n| key(n) == k) {
            out.push(DiffEntry {
                kind: DiffKind::Removed,
                path: format!("{section}/{k}"),
            });
        }
    }
    for n in new {
        let k = key(n);
        match old.iter().find(|o| key(o) == k) {
            None => {
                out.push(DiffEntry {
                    kind: DiffKind::Added,
                    path: format!("{section}/{k}"),
                });
                for child in children_of_added(n) {
                    out.push(DiffEntry {
                        kind: DiffKind::Added,
                        path: format!("{section}/{k}/{child}"),
                    });
                }
            }
            Some(o) => compare(out, &format!("{section}/{k}"), o, n),
        }
    }
}
