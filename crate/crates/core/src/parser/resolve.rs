//! Second pass: name resolution from the raw syntax tree to a checked
//! [`Architecture`]. Forward references between components are legal, so all
//! declarations are collected before any reference is resolved.

use std::collections::{HashMap, HashSet};

use super::grammar::{RawActivation, RawArch, RawRef};
use super::Diagnostic;
use crate::model::{
    ActionDecl, ActivationCondition, Actuator, Architecture, BasicContract, ChildRef, ComponentId,
    ContextOperator, ControlOperator, DataRequirement, Disjunction, InteractionContract, Order,
    Sensor, SensorSource, TypeDecl, TypeName,
};

pub fn resolve(raw: RawArch) -> Result<Architecture, Vec<Diagnostic>> {
    let mut r = Resolver {
        diags: Vec::new(),
        types: HashSet::new(),
        components: HashMap::new(),
    };
    let arch = r.run(raw);
    if r.diags.is_empty() {
        Ok(arch)
    } else {
        Err(r.diags)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Sensor,
    Context,
    Controller,
    Actuator,
}

impl Kind {
    fn noun(self) -> &'static str {
        match self {
            Kind::Sensor => "sensor",
            Kind::Context => "context operator",
            Kind::Controller => "controller",
            Kind::Actuator => "actuator",
        }
    }
}

struct Resolver {
    diags: Vec<Diagnostic>,
    types: HashSet<String>,
    components: HashMap<String, Kind>,
}

impl Resolver {
    fn error(&mut self, msg: impl Into<String>, span: super::Span) {
        self.diags.push(Diagnostic::error(msg, span));
    }

    fn run(&mut self, raw: RawArch) -> Architecture {
        // Declaration tables first; references may point forward.
        for t in &raw.types {
            if t.name.text == TypeName::TOP {
                self.error(
                    format!(
                        "`{}` is the implicit top type and cannot be redeclared",
                        TypeName::TOP
                    ),
                    t.name.span,
                );
            } else if !self.types.insert(t.name.text.clone()) {
                self.error(format!("duplicate type `{}`", t.name.text), t.name.span);
            }
        }
        for (id, kind) in raw
            .sensors
            .iter()
            .map(|s| (&s.id, Kind::Sensor))
            .chain(raw.contexts.iter().map(|c| (&c.id, Kind::Context)))
            .chain(raw.controllers.iter().map(|c| (&c.id, Kind::Controller)))
            .chain(raw.actuators.iter().map(|a| (&a.id, Kind::Actuator)))
        {
            if self.components.insert(id.text.clone(), kind).is_some() {
                self.error(format!("duplicate component `{}`", id.text), id.span);
            }
        }

        self.check_type_hierarchy(&raw);

        let mut arch = Architecture::empty(raw.name.text.clone());
        arch.types = raw
            .types
            .iter()
            .map(|t| TypeDecl {
                name: TypeName::new(&t.name.text),
                supertype: t.supertype.as_ref().map(|s| TypeName::new(&s.text)),
            })
            .collect();

        for s in &raw.sensors {
            let mut seen = HashSet::new();
            let mut sources = Vec::new();
            for src in &s.sources {
                if !seen.insert(src.name.text.clone()) {
                    self.error(
                        format!(
                            "duplicate source `{}` in sensor `{}`",
                            src.name.text, s.id.text
                        ),
                        src.name.span,
                    );
                }
                self.check_type(&src.value_type);
                let params = src.pull_params.clone().unwrap_or_default();
                for p in &params {
                    self.check_type(p);
                }
                sources.push(SensorSource {
                    name: src.name.text.clone(),
                    value_type: TypeName::new(&src.value_type.text),
                    pull_params: params.iter().map(|p| TypeName::new(&p.text)).collect(),
                });
            }
            arch.sensors.push(Sensor {
                id: ComponentId::new(&s.id.text),
                sources,
            });
        }

        // Source table for qualified reference checking.
        let sources: HashSet<(String, String)> = raw
            .sensors
            .iter()
            .flat_map(|s| {
                s.sources
                    .iter()
                    .map(move |src| (s.id.text.clone(), src.name.text.clone()))
            })
            .collect();

        for c in &raw.contexts {
            self.check_type(&c.value_type);
            if let Some(params) = &c.pull_params {
                for p in params {
                    self.check_type(p);
                }
            }
            let mut basics = Vec::new();
            let mut has_pull = false;
            for b in &c.basics {
                let activation = match &b.activation {
                    RawActivation::Push { terms } => {
                        let mut out_terms = Vec::new();
                        for term in terms {
                            let mut members = Vec::new();
                            for r in term {
                                if let Some(child) =
                                    self.resolve_child(r, &sources, "an activation")
                                {
                                    members.push(child);
                                }
                            }
                            if !members.is_empty() {
                                out_terms.push(Disjunction { members });
                            }
                        }
                        ActivationCondition::Push { terms: out_terms }
                    }
                    RawActivation::Pull { span } => {
                        if has_pull {
                            // Legal but unusual; determinacy will flag it.
                            let _ = span;
                        }
                        has_pull = true;
                        ActivationCondition::PullSelf
                    }
                };
                let mut targets = Vec::new();
                for r in &b.requirements {
                    if let Some(child) = self.resolve_child(r, &sources, "a data requirement") {
                        targets.push(child);
                    }
                }
                basics.push(BasicContract {
                    activation,
                    requirements: DataRequirement::of(targets),
                    emission: b.emission,
                });
            }
            if has_pull && c.pull_params.is_none() {
                self.error(
                    format!(
                        "context operator `{}` has a pull contract but no `pulled with (...)` declaration",
                        c.id.text
                    ),
                    c.id.span,
                );
            }
            arch.context_operators.push(ContextOperator {
                id: ComponentId::new(&c.id.text),
                value_type: TypeName::new(&c.value_type.text),
                pull_params: c
                    .pull_params
                    .as_ref()
                    .map(|ps| ps.iter().map(|p| TypeName::new(&p.text)).collect()),
                contract: InteractionContract { basics },
            });
        }

        for ctl in &raw.controllers {
            let mut subscriptions: Vec<ComponentId> = Vec::new();
            let mut orders: Vec<Order> = Vec::new();
            for rule in &ctl.rules {
                if rule.trigger.qualifier.is_some() {
                    self.error(
                        "controllers can receive information only from context operators, not sensor sources",
                        rule.trigger.span(),
                    );
                } else {
                    match self.components.get(&rule.trigger.name.text) {
                        Some(Kind::Context) => {
                            let id = ComponentId::new(&rule.trigger.name.text);
                            if !subscriptions.contains(&id) {
                                subscriptions.push(id);
                            }
                        }
                        Some(k) => {
                            let noun = k.noun();
                            self.error(
                                format!(
                                    "controller subscription `{}` must be a context operator, not a {noun}",
                                    rule.trigger.name.text
                                ),
                                rule.trigger.span(),
                            );
                        }
                        None => {
                            self.error(
                                format!("unknown component `{}`", rule.trigger.name.text),
                                rule.trigger.span(),
                            );
                        }
                    }
                }
                match self.components.get(&rule.actuator.text) {
                    Some(Kind::Actuator) => {
                        let declared = raw
                            .actuators
                            .iter()
                            .find(|a| a.id.text == rule.actuator.text)
                            .map(|a| a.actions.iter().any(|(n, _)| n.text == rule.action.text))
                            .unwrap_or(false);
                        if !declared {
                            self.error(
                                format!(
                                    "actuator `{}` declares no action `{}`",
                                    rule.actuator.text, rule.action.text
                                ),
                                rule.action.span,
                            );
                        } else {
                            let order = Order {
                                actuator: ComponentId::new(&rule.actuator.text),
                                action: rule.action.text.clone(),
                            };
                            if !orders.contains(&order) {
                                orders.push(order);
                            }
                        }
                    }
                    Some(k) => {
                        let noun = k.noun();
                        self.error(
                            format!(
                                "orders must target an actuator, but `{}` is a {noun}",
                                rule.actuator.text
                            ),
                            rule.actuator.span,
                        );
                    }
                    None => {
                        self.error(
                            format!("unknown component `{}`", rule.actuator.text),
                            rule.actuator.span,
                        );
                    }
                }
            }
            arch.control_operators.push(ControlOperator {
                id: ComponentId::new(&ctl.id.text),
                subscriptions,
                orders,
            });
        }

        for a in &raw.actuators {
            let mut seen = HashSet::new();
            let mut actions = Vec::new();
            for (name, params) in &a.actions {
                if !seen.insert(name.text.clone()) {
                    self.error(
                        format!(
                            "duplicate action `{}` in actuator `{}`",
                            name.text, a.id.text
                        ),
                        name.span,
                    );
                }
                for p in params {
                    self.check_type(p);
                }
                actions.push(ActionDecl {
                    name: name.text.clone(),
                    param_types: params.iter().map(|p| TypeName::new(&p.text)).collect(),
                });
            }
            arch.actuators.push(Actuator {
                id: ComponentId::new(&a.id.text),
                actions,
            });
        }

        arch
    }

    fn check_type(&mut self, t: &super::grammar::Ident) {
        if t.text != TypeName::TOP && !self.types.contains(&t.text) {
            self.error(format!("undeclared type `{}`", t.text), t.span);
        }
    }

    fn check_type_hierarchy(&mut self, raw: &RawArch) {
        let parents: HashMap<&str, &super::grammar::Ident> = raw
            .types
            .iter()
            .filter_map(|t| t.supertype.as_ref().map(|s| (t.name.text.as_str(), s)))
            .collect();
        for t in &raw.types {
            if let Some(sup) = &t.supertype {
                if sup.text != TypeName::TOP && !self.types.contains(&sup.text) {
                    self.error(format!("undeclared supertype `{}`", sup.text), sup.span);
                    continue;
                }
                // Walk upward from this declaration looking for a cycle.
                let mut seen = HashSet::new();
                seen.insert(t.name.text.as_str());
                let mut cur = sup.text.as_str();
                loop {
                    if !seen.insert(cur) {
                        self.error(
                            format!("type `{}` participates in a supertype cycle", t.name.text),
                            t.name.span,
                        );
                        break;
                    }
                    match parents.get(cur) {
                        Some(next) => cur = next.text.as_str(),
                        None => break,
                    }
                }
            }
        }
    }

    /// Resolve a reference occurring as a contract child: a dotted reference
    /// names a sensor source, a bare one a context operator.
    fn resolve_child(
        &mut self,
        r: &RawRef,
        sources: &HashSet<(String, String)>,
        position: &str,
    ) -> Option<ChildRef> {
        match &r.qualifier {
            Some(q) => match self.components.get(&q.text) {
                Some(Kind::Sensor) => {
                    if sources.contains(&(q.text.clone(), r.name.text.clone())) {
                        Some(ChildRef::Source(crate::model::SourceRef::new(
                            &q.text,
                            &r.name.text,
                        )))
                    } else {
                        self.error(
                            format!("sensor `{}` declares no source `{}`", q.text, r.name.text),
                            r.name.span,
                        );
                        None
                    }
                }
                Some(k) => {
                    let noun = k.noun();
                    self.error(format!("`{}` is a {noun}, not a sensor", q.text), q.span);
                    None
                }
                None => {
                    self.error(format!("unknown component `{}`", q.text), q.span);
                    None
                }
            },
            None => match self.components.get(&r.name.text) {
                Some(Kind::Context) => Some(ChildRef::Operator(ComponentId::new(&r.name.text))),
                Some(Kind::Sensor) => {
                    self.error(
                        format!(
                            "sensor `{}` must be referenced through one of its sources (`{}.<source>`)",
                            r.name.text, r.name.text
                        ),
                        r.name.span,
                    );
                    None
                }
                Some(k) => {
                    let noun = k.noun();
                    self.error(
                        format!(
                            "the child of {position} must be a sensor source or context operator, but `{}` is a {noun}",
                            r.name.text
                        ),
                        r.name.span,
                    );
                    None
                }
                None => {
                    self.error(format!("unknown component `{}`", r.name.text), r.name.span);
                    None
                }
            },
        }
    }
}
