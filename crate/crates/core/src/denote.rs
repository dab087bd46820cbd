//! Denotational semantics of interaction contracts: each basic contract maps
//! to one abstract method signature, and a parallel composition to the list
//! (tuple) of its members' signatures.
//!
//! The activation condition and data requirements determine the parameters,
//! the emission determines the return type. Data requirements become pull
//! callbacks, an optional emission becomes a publish callback, and a pull
//! activation contributes the operator's declared request parameters.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{
    ActivationCondition, Architecture, ChildRef, ComponentId, ContextOperator, Emission, TypeName,
};

/// A structured type term: plain values, unit, function types for callbacks
/// and tuples for compositions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TypeTerm {
    Value {
        name: TypeName,
    },
    Unit,
    Function {
        params: Vec<TypeTerm>,
        result: Box<TypeTerm>,
    },
    Tuple {
        items: Vec<TypeTerm>,
    },
}

impl TypeTerm {
    pub fn value(name: TypeName) -> Self {
        TypeTerm::Value { name }
    }

    pub fn function(params: Vec<TypeTerm>, result: TypeTerm) -> Self {
        TypeTerm::Function {
            params,
            result: Box::new(result),
        }
    }

    /// `publish(T)`: the type of a function publishing a value of type `T`.
    pub fn publish(value: TypeName) -> Self {
        TypeTerm::function(vec![TypeTerm::value(value)], TypeTerm::Unit)
    }

    /// ASCII rendering used by stub skeletons: `IPAddress -> String`,
    /// `(A, B) -> C`, `()`.
    pub fn render(&self) -> String {
        match self {
            TypeTerm::Value { name } => name.to_string(),
            TypeTerm::Unit => "()".to_string(),
            TypeTerm::Function { params, result } => {
                let lhs = match params.len() {
                    1 => {
                        let p = &params[0];
                        if matches!(p, TypeTerm::Function { .. }) {
                            format!("({})", p.render())
                        } else {
                            p.render()
                        }
                    }
                    _ => format!(
                        "({})",
                        params
                            .iter()
                            .map(TypeTerm::render)
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                };
                format!("{lhs} -> {}", result.render())
            }
            TypeTerm::Tuple { items } => format!(
                "({})",
                items
                    .iter()
                    .map(TypeTerm::render)
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        }
    }
}

impl fmt::Display for TypeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Role of one parameter of an abstract method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamRole {
    /// A value delivered by the activation (one per push term).
    ActivationValue,
    /// A parameter of the pull request when the contract is pull-activated.
    PullArg,
    /// A callback performing one declared data requirement.
    PullCallback,
    /// The callback publishing the operator's value when emission is optional.
    PublishCallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub role: ParamRole,
    pub name: String,
    #[serde(rename = "type")]
    pub ty: TypeTerm,
    /// The child a pull callback addresses; empty for other roles.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pulls: Option<ChildRef>,
}

/// The abstract method one basic contract imposes on an implementation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureDescriptor {
    pub name: String,
    pub params: Vec<Param>,
    #[serde(rename = "returnType")]
    pub return_type: TypeTerm,
}

impl SignatureDescriptor {
    pub fn publish_callback(&self) -> Option<&Param> {
        self.params
            .iter()
            .find(|p| p.role == ParamRole::PublishCallback)
    }

    pub fn pull_callbacks(&self) -> impl Iterator<Item = &Param> {
        self.params
            .iter()
            .filter(|p| p.role == ParamRole::PullCallback)
    }

    /// The function type in the notation of the contract denotation:
    /// parameter types joined by `×`, then `→` and the return type.
    pub fn denotation(&self) -> String {
        let arrow_term = |t: &TypeTerm| match t {
            TypeTerm::Function { params, result } => {
                let lhs = match params.len() {
                    0 => "()".to_string(),
                    1 => denote_atom(&params[0]),
                    _ => format!(
                        "({})",
                        params
                            .iter()
                            .map(denote_atom)
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                };
                format!("({lhs} → {})", denote_atom(result))
            }
            other => denote_atom(other),
        };
        let params: Vec<String> = self.params.iter().map(|p| arrow_term(&p.ty)).collect();
        let lhs = if params.is_empty() {
            "()".to_string()
        } else {
            params.join(" × ")
        };
        format!("{lhs} → {}", denote_atom(&self.return_type))
    }
}

fn denote_atom(t: &TypeTerm) -> String {
    match t {
        TypeTerm::Value { name } => name.to_string(),
        TypeTerm::Unit => "()".to_string(),
        TypeTerm::Function { params, result } => {
            let lhs = match params.len() {
                0 => "()".to_string(),
                1 => denote_atom(&params[0]),
                _ => format!(
                    "({})",
                    params
                        .iter()
                        .map(denote_atom)
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            };
            format!("{lhs} → {}", denote_atom(result))
        }
        TypeTerm::Tuple { items } => format!(
            "({})",
            items.iter().map(denote_atom).collect::<Vec<_>>().join(", ")
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DenoteError {
    #[error("`{child}` is pulled but answers no pull requests (inconsistent architecture)")]
    NotPullable { child: ComponentId },
}

/// Declared value type of a child name.
pub fn typeof_child(child: &ChildRef, arch: &Architecture) -> TypeName {
    match child {
        ChildRef::Source(s) => arch
            .source(s)
            .expect("resolved architecture")
            .value_type
            .clone(),
        ChildRef::Operator(id) => arch
            .context(id)
            .expect("resolved architecture")
            .value_type
            .clone(),
    }
}

/// Type of one push term; a disjunction takes the least upper bound of its
/// members' types.
pub fn typeof_term(members: &[ChildRef], arch: &Architecture) -> TypeName {
    let mut ty = typeof_child(&members[0], arch);
    for m in &members[1..] {
        ty = arch
            .lub(&ty, &typeof_child(m, arch))
            .unwrap_or_else(|_| TypeName::top());
    }
    ty
}

/// Parameter types of a pull request on a child.
pub fn args_of(child: &ChildRef, arch: &Architecture) -> Result<Vec<TypeName>, DenoteError> {
    match child {
        ChildRef::Source(s) => Ok(arch
            .source(s)
            .expect("resolved architecture")
            .pull_params
            .clone()),
        ChildRef::Operator(id) => {
            let op = arch.context(id).expect("resolved architecture");
            if op.pull_basic().is_none() {
                return Err(DenoteError::NotPullable { child: id.clone() });
            }
            Ok(op.pull_args().to_vec())
        }
    }
}

/// `access_typeof`: the function type of a pull request on a child, from its
/// request parameters to its value type.
pub fn access_typeof(child: &ChildRef, arch: &Architecture) -> Result<TypeTerm, DenoteError> {
    let params = args_of(child, arch)?
        .into_iter()
        .map(TypeTerm::value)
        .collect();
    Ok(TypeTerm::function(
        params,
        TypeTerm::value(typeof_child(child, arch)),
    ))
}

/// Compute the signature descriptors of an operator's contract, one per basic
/// contract in declaration order.
pub fn denote(
    op: &ContextOperator,
    arch: &Architecture,
) -> Result<Vec<SignatureDescriptor>, DenoteError> {
    let mut used_methods: Vec<String> = Vec::new();
    let mut out = Vec::new();
    for basic in &op.contract.basics {
        let method = unique(method_name(&basic.activation), &mut used_methods);
        let mut params = Vec::new();
        let mut used_params: Vec<String> = Vec::new();

        match &basic.activation {
            ActivationCondition::Push { terms } => {
                for term in terms {
                    let ty = typeof_term(&term.members, arch);
                    let name = unique(format!("new{ty}"), &mut used_params);
                    params.push(Param {
                        role: ParamRole::ActivationValue,
                        name,
                        ty: TypeTerm::value(ty),
                        pulls: None,
                    });
                }
            }
            ActivationCondition::PullSelf => {
                for ty in op.pull_args() {
                    let name = unique(format!("new{ty}"), &mut used_params);
                    params.push(Param {
                        role: ParamRole::PullArg,
                        name,
                        ty: TypeTerm::value(ty.clone()),
                        pulls: None,
                    });
                }
            }
        }

        for target in &basic.requirements.targets {
            let name = unique(callback_param_name(target), &mut used_params);
            params.push(Param {
                role: ParamRole::PullCallback,
                name,
                ty: access_typeof(target, arch)?,
                pulls: Some(target.clone()),
            });
        }

        if basic.emission == Emission::Maybe {
            let name = unique("publish".to_string(), &mut used_params);
            params.push(Param {
                role: ParamRole::PublishCallback,
                name,
                ty: TypeTerm::publish(op.value_type.clone()),
                pulls: None,
            });
        }

        let return_type = match (&basic.activation, basic.emission) {
            (ActivationCondition::PullSelf, _) => TypeTerm::value(op.value_type.clone()),
            (_, Emission::Always) => TypeTerm::value(op.value_type.clone()),
            _ => TypeTerm::Unit,
        };

        out.push(SignatureDescriptor {
            name: method,
            params,
            return_type,
        });
    }
    Ok(out)
}

/// Descriptors for every context operator of the architecture, in declaration
/// order.
pub fn denote_architecture(
    arch: &Architecture,
) -> Result<Vec<(ComponentId, Vec<SignatureDescriptor>)>, DenoteError> {
    arch.context_operators
        .iter()
        .map(|op| Ok((op.id.clone(), denote(op, arch)?)))
        .collect()
}

fn method_name(activation: &ActivationCondition) -> String {
    match activation {
        ActivationCondition::PullSelf => "get".to_string(),
        ActivationCondition::Push { terms } => {
            if terms.iter().any(|t| t.members.len() > 1) {
                return "onNewDisjunction".to_string();
            }
            let joined: Vec<String> = terms
                .iter()
                .map(|t| child_simple_name(&t.members[0]))
                .collect();
            format!("onNew{}", joined.join("And"))
        }
    }
}

/// Simple name of a child for generated identifiers: the operator name as
/// declared, or the capitalized source name (`line` becomes `Line`,
/// `ip2host` becomes `Ip2Host`).
fn child_simple_name(child: &ChildRef) -> String {
    match child {
        ChildRef::Operator(id) => id.to_string(),
        ChildRef::Source(s) => upper_first(&capitalize_after_digits(&s.source)),
    }
}

/// Name of the pull callback for a child: `PullFrom` plus the component name.
pub fn callback_name(child: &ChildRef) -> String {
    match child {
        ChildRef::Operator(id) => format!("PullFrom{id}"),
        ChildRef::Source(s) => format!("PullFrom{}", s.component),
    }
}

fn callback_param_name(child: &ChildRef) -> String {
    let base = match child {
        ChildRef::Operator(id) => id.to_string(),
        ChildRef::Source(s) => s.source.clone(),
    };
    decapitalize(&capitalize_after_digits(&base))
}

fn unique(base: String, used: &mut Vec<String>) -> String {
    let mut candidate = base.clone();
    let mut n = 1;
    while used.contains(&candidate) {
        n += 1;
        candidate = format!("{base}{n}");
    }
    used.push(candidate.clone());
    candidate
}

/// Lowercase the maximal leading run of uppercase letters: `IP2Profile`
/// becomes `ip2Profile`.
fn decapitalize(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_leading_run = true;
    for c in s.chars() {
        if in_leading_run && c.is_ascii_uppercase() {
            out.push(c.to_ascii_lowercase());
        } else {
            in_leading_run = false;
            out.push(c);
        }
    }
    out
}

/// Uppercase any letter directly following a digit: `ip2host` becomes
/// `ip2Host`.
fn capitalize_after_digits(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut prev_digit = false;
    for c in s.chars() {
        if prev_digit {
            out.push(c.to_ascii_uppercase());
        } else {
            out.push(c);
        }
        prev_digit = c.is_ascii_digit();
    }
    out
}

fn upper_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_ascii_uppercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}
