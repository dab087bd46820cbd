//! Promela emission for external model checking. One proctype per basic
//! contract (plus sensor source generators, controllers and actuators), one
//! buffered channel per emitter. Activations become guarded receives, data
//! requirements request/response pairs, emissions sends; optional emissions
//! become a nondeterministic if/fi around the send.

use std::collections::HashSet;
use std::fmt::Write;

use crate::model::{ActivationCondition, Architecture, ChildRef, Emission, TypeName};

const PROMELA_KEYWORDS: &[&str] = &[
    "active", "assert", "atomic", "bit", "bool", "break", "byte", "chan", "d_step", "do", "else",
    "empty", "enabled", "eval", "false", "fi", "full", "goto", "hidden", "if", "init", "int",
    "len", "ltl", "mtype", "nempty", "never", "nfull", "od", "of", "pc_value", "printf",
    "priority", "proctype", "provided", "run", "short", "skip", "timeout", "true", "typedef",
    "unless", "unsigned", "xr", "xs",
];

/// Deterministic lowercase identifiers, collision- and keyword-safe.
struct Names {
    used: HashSet<String>,
}

impl Names {
    fn new() -> Self {
        Names {
            used: PROMELA_KEYWORDS.iter().map(|k| k.to_string()).collect(),
        }
    }

    fn fresh(&mut self, base: &str) -> String {
        let base = base.to_ascii_lowercase().replace(['.', '-'], "_");
        let mut candidate = base.clone();
        let mut n = 1;
        while self.used.contains(&candidate) {
            n += 1;
            candidate = format!("{base}_{n}");
        }
        self.used.insert(candidate.clone());
        candidate
    }
}

struct Emitter {
    out: String,
    capacity: u8,
}

impl Emitter {
    fn chan(&mut self, name: &str) {
        let cap = self.capacity;
        let _ = writeln!(self.out, "chan {name} = [{cap}] of {{ byte }};");
    }
}

fn lower(c: &ChildRef, names: &NameTable) -> String {
    match c {
        ChildRef::Source(s) => names.source_push[&s.to_string()].clone(),
        ChildRef::Operator(id) => names.op_out[id.as_str()].clone(),
    }
}

struct NameTable {
    source_push: std::collections::BTreeMap<String, String>,
    source_get: std::collections::BTreeMap<String, String>,
    op_out: std::collections::BTreeMap<String, String>,
    op_get: std::collections::BTreeMap<String, String>,
    order: std::collections::BTreeMap<String, String>,
}

fn var_name(ty: &TypeName) -> String {
    ty.as_str().to_ascii_lowercase()
}

fn fresh_var(base: String, used: &mut Vec<String>) -> String {
    let mut candidate = base.clone();
    let mut n = 1;
    while used.contains(&candidate) {
        n += 1;
        candidate = format!("{base}{n}");
    }
    used.push(candidate.clone());
    candidate
}

/// Emit the Promela model of a resolved architecture.
pub fn emit_promela(arch: &Architecture, capacity: u8) -> String {
    let mut names = Names::new();
    let mut table = NameTable {
        source_push: Default::default(),
        source_get: Default::default(),
        op_out: Default::default(),
        op_get: Default::default(),
        order: Default::default(),
    };

    // Stable name assignment in declaration order.
    for sensor in &arch.sensors {
        for src in &sensor.sources {
            let key = format!("{}.{}", sensor.id, src.name);
            let base = format!("{}_{}", sensor.id, src.name);
            table.source_push.insert(key.clone(), names.fresh(&base));
            table
                .source_get
                .insert(key, names.fresh(&format!("{base}_get")));
        }
    }
    for op in &arch.context_operators {
        table
            .op_out
            .insert(op.id.to_string(), names.fresh(op.id.as_str()));
        table
            .op_get
            .insert(op.id.to_string(), names.fresh(&format!("{}_get", op.id)));
    }
    let mut order_keys: Vec<(String, String)> = Vec::new();
    for ctl in &arch.control_operators {
        for order in &ctl.orders {
            let key = format!("{}.{}", order.actuator, order.action);
            if !table.order.contains_key(&key) {
                let base = format!("{}_{}", order.actuator, order.action);
                table.order.insert(key.clone(), names.fresh(&base));
                order_keys.push((order.actuator.to_string(), key));
            }
        }
    }

    let mut e = Emitter {
        out: String::new(),
        capacity: capacity.max(1),
    };
    let _ = writeln!(e.out, "/* Promela model of architecture {} */", arch.name);

    // Which channels are actually used.
    let pushed_sources: Vec<String> = arch
        .source_refs()
        .filter(|s| !arch.push_parents(&ChildRef::Source(s.clone())).is_empty())
        .map(|s| s.to_string())
        .collect();
    let pulled_sources: Vec<String> = arch
        .source_refs()
        .filter(|s| pull_requesters(arch, &ChildRef::Source(s.clone())))
        .map(|s| s.to_string())
        .collect();
    let emitting_ops: Vec<String> = arch
        .context_operators
        .iter()
        .filter(|o| {
            o.contract
                .basics
                .iter()
                .any(|b| b.emission != Emission::Never)
        })
        .map(|o| o.id.to_string())
        .collect();
    let pulled_ops: Vec<String> = arch
        .context_operators
        .iter()
        .filter(|o| o.pull_basic().is_some())
        .map(|o| o.id.to_string())
        .collect();

    if !pushed_sources.is_empty() || !pulled_sources.is_empty() {
        let _ = writeln!(e.out);
        let _ = writeln!(e.out, "/* sensor source channels */");
        for key in &pushed_sources {
            let name = table.source_push[key].clone();
            e.chan(&name);
        }
        for key in &pulled_sources {
            let get = table.source_get[key].clone();
            e.chan(&get);
            let ret = format!("{}_return", table.source_push[key]);
            e.chan(&ret);
        }
    }
    if !emitting_ops.is_empty() || !pulled_ops.is_empty() {
        let _ = writeln!(e.out);
        let _ = writeln!(e.out, "/* context operator channels */");
        for key in &emitting_ops {
            let name = table.op_out[key].clone();
            e.chan(&name);
        }
        for key in &pulled_ops {
            let get = table.op_get[key].clone();
            e.chan(&get);
            let ret = format!("{}_return", table.op_out[key]);
            e.chan(&ret);
        }
    }
    if !order_keys.is_empty() {
        let _ = writeln!(e.out);
        let _ = writeln!(e.out, "/* order channels */");
        for (_, key) in &order_keys {
            let name = table.order[key].clone();
            e.chan(&name);
        }
    }

    // Sensor source processes.
    for sensor in &arch.sensors {
        for src in &sensor.sources {
            let key = format!("{}.{}", sensor.id, src.name);
            let pushes = pushed_sources.contains(&key);
            let pulled = pulled_sources.contains(&key);
            if !pushes && !pulled {
                continue;
            }
            let _ = writeln!(e.out);
            let _ = writeln!(e.out, "active proctype {}_{}() {{", sensor.id, src.name);
            if pulled {
                let _ = writeln!(e.out, "  byte req;");
            }
            let _ = writeln!(e.out, "  do");
            if pushes {
                let _ = writeln!(e.out, "  :: {}!1", table.source_push[&key]);
            }
            if pulled {
                let _ = writeln!(
                    e.out,
                    "  :: {}?req -> {}_return!1",
                    table.source_get[&key], table.source_push[&key]
                );
            }
            let _ = writeln!(e.out, "  od");
            let _ = writeln!(e.out, "}}");
        }
    }

    // One proctype per basic contract.
    for op in &arch.context_operators {
        for (basic_idx, basic) in op.contract.basics.iter().enumerate() {
            let proc_name = if op.contract.basics.len() == 1 {
                op.id.to_string()
            } else {
                format!("{}_{}", op.id, basic_idx + 1)
            };
            let _ = writeln!(e.out);
            let _ = writeln!(e.out, "active proctype {proc_name}() {{");

            let mut vars: Vec<String> = Vec::new();
            let mut pull_vars = Vec::new();
            let activation_vars: Vec<String> = match &basic.activation {
                ActivationCondition::Push { terms } => terms
                    .iter()
                    .map(|t| {
                        let ty = crate::denote::typeof_term(&t.members, arch);
                        fresh_var(format!("new{}", var_name(&ty)), &mut vars)
                    })
                    .collect(),
                ActivationCondition::PullSelf => {
                    vec![fresh_var("req".to_string(), &mut vars)]
                }
            };
            for target in &basic.requirements.targets {
                let ty = crate::denote::typeof_child(target, arch);
                pull_vars.push(fresh_var(var_name(&ty), &mut vars));
            }
            if !vars.is_empty() {
                let _ = writeln!(e.out, "  byte {};", vars.join(", "));
            }
            let _ = writeln!(e.out, "  do");

            // Body shared by every guard alternative.
            let mut body: Vec<String> = Vec::new();
            for (target, var) in basic.requirements.targets.iter().zip(&pull_vars) {
                let (get, ret) = match target {
                    ChildRef::Source(s) => {
                        let key = s.to_string();
                        (
                            table.source_get[&key].clone(),
                            format!("{}_return", table.source_push[&key]),
                        )
                    }
                    ChildRef::Operator(id) => (
                        table.op_get[id.as_str()].clone(),
                        format!("{}_return", table.op_out[id.as_str()]),
                    ),
                };
                body.push(format!("{get}!1;"));
                body.push(format!("{ret}?{var};"));
            }
            let own = table.op_out[op.id.as_str()].clone();
            let reply = format!("{own}_return!1;");
            match (&basic.activation, basic.emission) {
                (ActivationCondition::Push { .. }, Emission::Always) => {
                    body.push(format!("{own}!1;"));
                }
                (ActivationCondition::Push { .. }, Emission::Maybe) => {
                    body.push("if".to_string());
                    body.push(format!(":: {own}!1"));
                    body.push(":: skip".to_string());
                    body.push("fi;".to_string());
                }
                (ActivationCondition::Push { .. }, Emission::Never) => {}
                (ActivationCondition::PullSelf, Emission::Always) => {
                    body.push(format!("{own}!1;"));
                    body.push(reply);
                }
                (ActivationCondition::PullSelf, Emission::Maybe) => {
                    body.push("if".to_string());
                    body.push(format!(":: {own}!1"));
                    body.push(":: skip".to_string());
                    body.push("fi;".to_string());
                    body.push(reply);
                }
                (ActivationCondition::PullSelf, Emission::Never) => {
                    body.push(reply);
                }
            }

            let write_alternative =
                |out: &mut String, guard: &str, rest: &[String], body: &[String]| {
                    let _ = writeln!(out, "  :: {guard} -> {{");
                    for r in rest {
                        let _ = writeln!(out, "      {r}");
                    }
                    for line in body {
                        if line == "if" {
                            let _ = writeln!(out, "      if");
                        } else if line.starts_with("::") {
                            let _ = writeln!(out, "      {line}");
                        } else if line == "fi;" {
                            let _ = writeln!(out, "      fi;");
                        } else {
                            let _ = writeln!(out, "      {line}");
                        }
                    }
                    let _ = writeln!(out, "    }}");
                };

            match &basic.activation {
                ActivationCondition::Push { terms } => {
                    // One alternative per member of the first (possibly
                    // disjunctive) term; remaining joint receives follow
                    // inside the body.
                    let rest: Vec<String> = terms
                        .iter()
                        .zip(&activation_vars)
                        .skip(1)
                        .map(|(t, var)| {
                            // Joint terms with disjunctions would need one
                            // alternative per combination; receive the first
                            // member representative.
                            format!("{}?{};", lower(&t.members[0], &table), var)
                        })
                        .collect();
                    for member in &terms[0].members {
                        let guard = format!("{}?{}", lower(member, &table), activation_vars[0]);
                        write_alternative(&mut e.out, &guard, &rest, &body);
                    }
                }
                ActivationCondition::PullSelf => {
                    let guard = format!("{}?{}", table.op_get[op.id.as_str()], activation_vars[0]);
                    write_alternative(&mut e.out, &guard, &[], &body);
                }
            }
            let _ = writeln!(e.out, "  od");
            let _ = writeln!(e.out, "}}");
        }
    }

    // Controllers.
    for ctl in &arch.control_operators {
        if ctl.subscriptions.is_empty() {
            continue;
        }
        let _ = writeln!(e.out);
        let _ = writeln!(e.out, "active proctype {}() {{", ctl.id);
        let mut vars: Vec<String> = Vec::new();
        let sub_vars: Vec<String> = ctl
            .subscriptions
            .iter()
            .map(|s| {
                let ty = arch.context(s).expect("resolved").value_type.clone();
                fresh_var(format!("new{}", var_name(&ty)), &mut vars)
            })
            .collect();
        let _ = writeln!(e.out, "  byte {};", vars.join(", "));
        let _ = writeln!(e.out, "  do");
        for (sub, var) in ctl.subscriptions.iter().zip(&sub_vars) {
            let _ = writeln!(e.out, "  :: {}?{} -> {{", table.op_out[sub.as_str()], var);
            for order in &ctl.orders {
                let key = format!("{}.{}", order.actuator, order.action);
                let _ = writeln!(e.out, "      {}!1;", table.order[&key]);
            }
            let _ = writeln!(e.out, "    }}");
        }
        let _ = writeln!(e.out, "  od");
        let _ = writeln!(e.out, "}}");
    }

    // Actuators.
    for act in &arch.actuators {
        let incoming: Vec<String> = order_keys
            .iter()
            .filter(|(a, _)| a == act.id.as_str())
            .map(|(_, key)| table.order[key].clone())
            .collect();
        if incoming.is_empty() {
            continue;
        }
        let _ = writeln!(e.out);
        let _ = writeln!(e.out, "active proctype {}() {{", act.id);
        let _ = writeln!(e.out, "  byte req;");
        let _ = writeln!(e.out, "  do");
        for chan in incoming {
            let _ = writeln!(e.out, "  :: {chan}?req -> skip");
        }
        let _ = writeln!(e.out, "  od");
        let _ = writeln!(e.out, "}}");
    }

    e.out
}

fn pull_requesters(arch: &Architecture, child: &ChildRef) -> bool {
    arch.context_operators.iter().any(|op| {
        op.contract
            .basics
            .iter()
            .any(|b| b.requirements.targets.contains(child))
    })
}
