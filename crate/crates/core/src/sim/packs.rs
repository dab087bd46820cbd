//! Ready-made handler packs so architectures simulate out of the box: a
//! generic pass-through pack for any checked architecture, a scripted pack
//! for replaying fixed publish decisions, and table-backed application logic
//! for the bundled web server fixture.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, VecDeque};
use std::hash::{Hash, Hasher};

use super::{Handler, HandlerFault, SimError, Simulator, Value};
use crate::denote::TypeTerm;
use crate::model::{ActivationCondition, ComponentId, Emission, TypeName};

/// How pass-through handlers resolve optional emissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaybeMode {
    /// Publish on every activation.
    Publish,
    /// Never publish.
    Drop,
    /// Publish when the hash of the value payload and this seed is even;
    /// deterministic but value-dependent.
    Hashed(u64),
}

impl MaybeMode {
    fn decide(&self, value: &Value) -> bool {
        match self {
            MaybeMode::Publish => true,
            MaybeMode::Drop => false,
            MaybeMode::Hashed(seed) => {
                let mut h = DefaultHasher::new();
                seed.hash(&mut h);
                value.repr.hash(&mut h);
                h.finish().is_multiple_of(2)
            }
        }
    }
}

fn passthrough_value(ty: &TypeName, scope_values: &[Value], op: &ComponentId) -> Value {
    match scope_values.first() {
        Some(v) => v.retag(ty.clone()),
        None => Value::typed(ty.clone(), format!("{op}()")),
    }
}

/// Bind a pass-through handler to every still-unbound descriptor and a
/// synthesizing responder to every source without one.
///
/// Push handlers forward their first activation value retagged to the
/// operator's type. Pull handlers answer with the operator's most recent
/// value, falling back to a value synthesized from the request arguments.
/// Optional emissions follow `mode`.
pub fn install_passthrough(sim: &mut Simulator, mode: MaybeMode) -> Result<(), SimError> {
    install_generic(sim, mode, false)
}

/// Like [`install_passthrough`], but handlers also perform every declared
/// data requirement once per activation (with synthesized arguments), the
/// way the verifier's flow model assumes. Useful for checking model verdicts
/// against simulator traces.
pub fn install_passthrough_pulling(sim: &mut Simulator, mode: MaybeMode) -> Result<(), SimError> {
    install_generic(sim, mode, true)
}

fn install_generic(
    sim: &mut Simulator,
    mode: MaybeMode,
    pull_requirements: bool,
) -> Result<(), SimError> {
    let arch = sim.architecture().clone();
    for unbound in sim.unbound_descriptors() {
        let (op_name, method) = unbound.split_once('.').expect("Operator.method format");
        let op_id = ComponentId::new(op_name);
        let op = arch.context(&op_id).expect("descriptor operator exists");
        let entry = sim.manifest().operator(&op_id).expect("manifest entry");
        let (basic_idx, descriptor) = entry
            .abstract_methods
            .iter()
            .enumerate()
            .find(|(_, m)| m.name == method)
            .expect("descriptor exists");
        let basic = &op.contract.basics[basic_idx];
        let returns_value = descriptor.return_type != TypeTerm::Unit;
        let value_type = op.value_type.clone();
        let emission = basic.emission;
        let is_pull = basic.activation == ActivationCondition::PullSelf;
        let id_for_default = op_id.clone();
        let pulls: Vec<(String, Vec<TypeName>)> = if pull_requirements {
            basic
                .requirements
                .targets
                .iter()
                .map(|t| {
                    let args = crate::denote::args_of(t, &arch).unwrap_or_default();
                    (t.to_string(), args)
                })
                .collect()
        } else {
            Vec::new()
        };

        let body =
            move |scope: &mut super::ActivationScope<'_>| -> Result<Option<Value>, HandlerFault> {
                for (target, params) in &pulls {
                    let args: Vec<Value> = params
                        .iter()
                        .map(|t| Value::typed(t.clone(), "1"))
                        .collect();
                    scope.pull(target, &args)?;
                }
                if is_pull {
                    let value = scope
                        .latest_self()
                        .map(|v| v.retag(value_type.clone()))
                        .unwrap_or_else(|| {
                            let args: Vec<&str> =
                                scope.values().iter().map(|v| v.repr.as_str()).collect();
                            Value::typed(
                                value_type.clone(),
                                format!("{id_for_default}[{}]", args.join(",")),
                            )
                        });
                    if emission == Emission::Maybe && mode.decide(&value) {
                        scope.publish(value.clone())?;
                    }
                    Ok(Some(value))
                } else {
                    let value = passthrough_value(&value_type, scope.values(), &id_for_default);
                    match emission {
                        Emission::Always => Ok(Some(value)),
                        Emission::Maybe => {
                            if mode.decide(&value) {
                                scope.publish(value)?;
                            }
                            Ok(None)
                        }
                        Emission::Never => Ok(None),
                    }
                }
            };
        sim.register_handler(Handler {
            operator: op_id,
            method: method.to_string(),
            returns_value,
            body: Box::new(body),
        })?;
    }

    for source in arch.source_refs() {
        if sim.has_source_responder(&source) {
            continue;
        }
        let decl = arch.source(&source).expect("source exists").clone();
        let display = source.to_string();
        sim.register_source_responder(
            source,
            Box::new(move |args: &[Value]| {
                let rendered: Vec<&str> = args.iter().map(|v| v.repr.as_str()).collect();
                Ok(Value::typed(
                    decl.value_type.clone(),
                    format!("{display}[{}]", rendered.join(",")),
                ))
            }),
        )?;
    }
    Ok(())
}

/// Bind handlers whose optional emissions replay a fixed script: for each
/// operator, the queued booleans drive successive activations (missing
/// entries mean "do not publish"). Everything else behaves like the
/// pass-through pack.
pub fn install_scripted(
    sim: &mut Simulator,
    scripts: HashMap<ComponentId, VecDeque<bool>>,
) -> Result<(), SimError> {
    let arch = sim.architecture().clone();
    let mut scripts = scripts;
    for op in &arch.context_operators {
        for (basic_idx, basic) in op.contract.basics.iter().enumerate() {
            if basic.emission != Emission::Maybe {
                continue;
            }
            let entry = sim.manifest().operator(&op.id).expect("manifest entry");
            let descriptor = &entry.abstract_methods[basic_idx];
            let returns_value = descriptor.return_type != TypeTerm::Unit;
            let value_type = op.value_type.clone();
            let is_pull = basic.activation == ActivationCondition::PullSelf;
            let id = op.id.clone();
            let mut script = scripts.remove(&op.id).unwrap_or_default();
            let body = move |scope: &mut super::ActivationScope<'_>| -> Result<Option<Value>, HandlerFault> {
                let value = passthrough_value(&value_type, scope.values(), &id);
                if script.pop_front().unwrap_or(false) {
                    scope.publish(value.clone())?;
                }
                if is_pull {
                    Ok(Some(value))
                } else {
                    Ok(None)
                }
            };
            sim.register_handler(Handler {
                operator: op.id.clone(),
                method: descriptor.name.clone(),
                returns_value,
                body: Box::new(body),
            })?;
        }
    }
    install_passthrough(sim, MaybeMode::Drop)
}

/// Register a handler unless its descriptor is missing (the architecture is
/// not the expected fixture) or already bound (the host supplied its own).
fn bind_default(sim: &mut Simulator, handler: Handler) -> Result<(), SimError> {
    match sim.register_handler(handler) {
        Ok(())
        | Err(SimError::UnknownDescriptor { .. })
        | Err(SimError::DuplicateBinding { .. }) => Ok(()),
        Err(other) => Err(other),
    }
}

/// Application logic for the bundled web server fixture: the parser extracts
/// the client address from the log line, profiles are resolved through the
/// lookup tables below, and the intrusion detector reports profiles marked as
/// intruders.
///
/// Operators outside the fixture core (present in the extended variants) fall
/// back to pass-through behavior.
pub fn install_webserver_demo(sim: &mut Simulator) -> Result<(), SimError> {
    let ip2host: HashMap<&str, &str> = [
        ("10.0.0.1", "badguy.example.com"),
        ("10.0.0.2", "alice.corp.example.org"),
        ("10.0.0.3", "bob.corp.example.org"),
    ]
    .into_iter()
    .collect();
    let host2profile: HashMap<&str, &str> = [
        ("badguy.example.com", "intruder"),
        ("alice.corp.example.org", "employee alice"),
        ("bob.corp.example.org", "employee bob"),
    ]
    .into_iter()
    .collect();

    bind_default(
        sim,
        Handler::new("AccessLogParser", "onNewLine", true, |scope| {
            let line = &scope.value(0).repr;
            Ok(Some(Value::new("Access", line.clone())))
        }),
    )?;

    bind_default(
        sim,
        Handler::new("AccessingProfile", "onNewAccessLogParser", true, |scope| {
            let access = scope.value(0).clone();
            let ip = access
                .repr
                .split_whitespace()
                .next()
                .unwrap_or("0.0.0.0")
                .to_string();
            let profile = scope.pull("IP2Profile", &[Value::new("IPAddress", ip.clone())])?;
            Ok(Some(Value::new(
                "IdentifiedAccess",
                format!("{ip}:{}", profile.repr),
            )))
        }),
    )?;

    bind_default(
        sim,
        Handler::new("IP2Profile", "get", true, |scope| {
            let ip = scope.value(0).clone();
            let host = scope.pull("NSLookup.ip2host", &[ip])?;
            let profile = scope.pull("LDAPServer.host2profile", &[host])?;
            Ok(Some(profile))
        }),
    )?;

    bind_default(
        sim,
        Handler::new(
            "IntrusionDetector",
            "onNewAccessingProfile",
            false,
            |scope| {
                let access = scope.value(0).clone();
                if access.repr.contains("intruder") {
                    scope.publish(access.retag(TypeName::new("IdentifiedAccess")))?;
                }
                Ok(None)
            },
        ),
    )?;

    let _ = sim.register_source_responder(
        crate::model::SourceRef::new("NSLookup", "ip2host"),
        Box::new(move |args: &[Value]| {
            let ip = args[0].repr.as_str();
            let host = ip2host
                .get(ip)
                .map(|h| h.to_string())
                .unwrap_or_else(|| format!("host-{ip}.example.net"));
            Ok(Value::new("String", host))
        }),
    );
    let _ = sim.register_source_responder(
        crate::model::SourceRef::new("LDAPServer", "host2profile"),
        Box::new(move |args: &[Value]| {
            let host = args[0].repr.as_str();
            let profile = host2profile.get(host).copied().unwrap_or("unknown");
            Ok(Value::new("Profile", profile))
        }),
    );

    install_passthrough(sim, MaybeMode::Drop)
}
