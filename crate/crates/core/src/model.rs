//! Object model for SCC architectures: the four component layers, interaction
//! contracts, and the small algebra (`names`, `children`, `lub`) every other
//! pass is built on.
//!
//! An [`Architecture`] is immutable once resolved; all operations here are
//! side-effect free and safe to share across threads.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Name of a declared value type. The type lattice is a declared
/// single-inheritance hierarchy closed by an implicit top type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TypeName(String);

impl TypeName {
    pub const TOP: &'static str = "Top";

    pub fn new(name: impl Into<String>) -> Self {
        TypeName(name.into())
    }

    /// The implicit top type closing the lattice.
    pub fn top() -> Self {
        TypeName(Self::TOP.to_string())
    }

    pub fn is_top(&self) -> bool {
        self.0 == Self::TOP
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Declaration of a value type, optionally extending a supertype.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeDecl {
    pub name: TypeName,
    pub supertype: Option<TypeName>,
}

/// Identifier of a component (sensor, context operator, control operator or
/// actuator). Unique across all kinds within one architecture.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentId(String);

impl ComponentId {
    pub fn new(name: impl Into<String>) -> Self {
        ComponentId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Qualified reference to one information source of a sensor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceRef {
    pub component: ComponentId,
    pub source: String,
}

impl SourceRef {
    pub fn new(component: impl Into<String>, source: impl Into<String>) -> Self {
        SourceRef {
            component: ComponentId::new(component),
            source: source.into(),
        }
    }
}

impl fmt::Display for SourceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.component, self.source)
    }
}

/// A child position in the data-flow graph: either a sensor source or a
/// context operator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ChildRef {
    Source(SourceRef),
    Operator(ComponentId),
}

impl ChildRef {
    pub fn source(component: impl Into<String>, source: impl Into<String>) -> Self {
        ChildRef::Source(SourceRef::new(component, source))
    }

    pub fn operator(id: impl Into<String>) -> Self {
        ChildRef::Operator(ComponentId::new(id))
    }
}

impl fmt::Display for ChildRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChildRef::Source(s) => s.fmt(f),
            ChildRef::Operator(id) => id.fmt(f),
        }
    }
}

/// A name occurring in an activation condition or a data requirement.
///
/// The self marker is a distinguished value, never a [`ComponentId`]; the
/// parser rejects `self` as an identifier so the two cannot collide.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Name {
    Source(SourceRef),
    Operator(ComponentId),
    SelfMarker,
}

impl Name {
    pub fn as_child(&self) -> Option<ChildRef> {
        match self {
            Name::Source(s) => Some(ChildRef::Source(s.clone())),
            Name::Operator(id) => Some(ChildRef::Operator(id.clone())),
            Name::SelfMarker => None,
        }
    }
}

impl From<ChildRef> for Name {
    fn from(c: ChildRef) -> Self {
        match c {
            ChildRef::Source(s) => Name::Source(s),
            ChildRef::Operator(id) => Name::Operator(id),
        }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Name::Source(s) => s.fmt(f),
            Name::Operator(id) => id.fmt(f),
            Name::SelfMarker => f.write_str("self"),
        }
    }
}

/// One term of a push activation: a nonempty disjunction of child names.
/// Most terms are a single name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disjunction {
    pub members: Vec<ChildRef>,
}

impl Disjunction {
    pub fn single(child: ChildRef) -> Self {
        Disjunction {
            members: vec![child],
        }
    }

    pub fn is_disjunctive(&self) -> bool {
        self.members.len() > 1
    }
}

/// What triggers one basic contract: a joint push of values from all listed
/// terms, or a pull request addressed to the operator itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActivationCondition {
    /// Fires when every term has delivered a value; a disjunctive term is
    /// satisfied by any one of its members.
    Push { terms: Vec<Disjunction> },
    /// Fires when a parent issues a pull request; always returns a value.
    PullSelf,
}

impl ActivationCondition {
    pub fn push_single(child: ChildRef) -> Self {
        ActivationCondition::Push {
            terms: vec![Disjunction::single(child)],
        }
    }

    /// Flat set of all names used by the condition, expanding disjunctions.
    /// A pull activation yields the singleton self marker.
    pub fn names(&self) -> BTreeSet<Name> {
        match self {
            ActivationCondition::Push { terms } => terms
                .iter()
                .flat_map(|t| t.members.iter())
                .map(|c| Name::from(c.clone()))
                .collect(),
            ActivationCondition::PullSelf => std::iter::once(Name::SelfMarker).collect(),
        }
    }
}

/// Children the handler may pull from during one activation. Pulling is
/// always optional at runtime.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DataRequirement {
    pub targets: Vec<ChildRef>,
}

impl DataRequirement {
    pub fn none() -> Self {
        DataRequirement::default()
    }

    pub fn of(targets: Vec<ChildRef>) -> Self {
        DataRequirement { targets }
    }

    pub fn names(&self) -> BTreeSet<Name> {
        self.targets.iter().map(|c| Name::from(c.clone())).collect()
    }
}

/// Whether one activation always, sometimes or never pushes a new value to
/// all parents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Emission {
    Always,
    Maybe,
    Never,
}

/// One basic interaction contract: activation condition, data requirements
/// and emission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasicContract {
    pub activation: ActivationCondition,
    pub requirements: DataRequirement,
    pub emission: Emission,
}

/// An interaction contract: a nonempty parallel composition of basic
/// contracts. Order is preserved for stable reporting; the semantics do not
/// depend on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionContract {
    pub basics: Vec<BasicContract>,
}

impl InteractionContract {
    pub fn single(basic: BasicContract) -> Self {
        InteractionContract {
            basics: vec![basic],
        }
    }
}

/// One information source of a sensor. Every source answers pull requests;
/// `pull_params` lists the parameter types of such requests (often empty).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorSource {
    pub name: String,
    pub value_type: TypeName,
    pub pull_params: Vec<TypeName>,
}

/// A sensor: the only proactive kind of component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sensor {
    pub id: ComponentId,
    pub sources: Vec<SensorSource>,
}

/// A context operator: refines sensed data under an interaction contract.
/// `pull_params` is declared (possibly empty) exactly when some basic
/// contract is pull-activated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextOperator {
    pub id: ComponentId,
    pub value_type: TypeName,
    pub pull_params: Option<Vec<TypeName>>,
    pub contract: InteractionContract,
}

impl ContextOperator {
    /// Index and contract of the pull-activated basic, if any.
    pub fn pull_basic(&self) -> Option<(usize, &BasicContract)> {
        self.contract
            .basics
            .iter()
            .enumerate()
            .find(|(_, b)| b.activation == ActivationCondition::PullSelf)
    }

    /// Pull request parameter types, defaulting to none when undeclared.
    pub fn pull_args(&self) -> &[TypeName] {
        self.pull_params.as_deref().unwrap_or(&[])
    }
}

/// An order a control operator can give: one action of one actuator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Order {
    pub actuator: ComponentId,
    pub action: String,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.actuator, self.action)
    }
}

/// A control operator: receives data from subscribed context operators and
/// forwards each received value to all declared orders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlOperator {
    pub id: ComponentId,
    pub subscriptions: Vec<ComponentId>,
    pub orders: Vec<Order>,
}

/// One action offered by an actuator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDecl {
    pub name: String,
    pub param_types: Vec<TypeName>,
}

/// An actuator: executes actions on the environment, activated only by
/// orders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actuator {
    pub id: ComponentId,
    pub actions: Vec<ActionDecl>,
}

/// The kind of component an identifier denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComponentKind {
    Sensor,
    Context,
    Controller,
    Actuator,
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ComponentKind::Sensor => "sensor",
            ComponentKind::Context => "context",
            ComponentKind::Controller => "controller",
            ComponentKind::Actuator => "actuator",
        };
        f.write_str(s)
    }
}

/// A fully resolved SCC architecture. The data-flow graph induced by
/// activations, requirements and subscriptions follows the four-layer shape:
/// sensor to context, context to context, context to control, control to
/// actuator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub name: String,
    pub types: Vec<TypeDecl>,
    pub sensors: Vec<Sensor>,
    pub context_operators: Vec<ContextOperator>,
    pub control_operators: Vec<ControlOperator>,
    pub actuators: Vec<Actuator>,
}

/// Errors raised by model lookups on unresolved names.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown component `{0}`")]
    UnknownComponent(ComponentId),
    #[error("unknown sensor source `{0}`")]
    UnknownSource(SourceRef),
    #[error("undeclared type `{0}`")]
    UndeclaredType(TypeName),
}

impl Architecture {
    pub fn empty(name: impl Into<String>) -> Self {
        Architecture {
            name: name.into(),
            types: Vec::new(),
            sensors: Vec::new(),
            context_operators: Vec::new(),
            control_operators: Vec::new(),
            actuators: Vec::new(),
        }
    }

    pub fn sensor(&self, id: &ComponentId) -> Option<&Sensor> {
        self.sensors.iter().find(|s| &s.id == id)
    }

    pub fn context(&self, id: &ComponentId) -> Option<&ContextOperator> {
        self.context_operators.iter().find(|c| &c.id == id)
    }

    pub fn controller(&self, id: &ComponentId) -> Option<&ControlOperator> {
        self.control_operators.iter().find(|c| &c.id == id)
    }

    pub fn actuator(&self, id: &ComponentId) -> Option<&Actuator> {
        self.actuators.iter().find(|a| &a.id == id)
    }

    pub fn kind_of(&self, id: &ComponentId) -> Option<ComponentKind> {
        if self.sensor(id).is_some() {
            Some(ComponentKind::Sensor)
        } else if self.context(id).is_some() {
            Some(ComponentKind::Context)
        } else if self.controller(id).is_some() {
            Some(ComponentKind::Controller)
        } else if self.actuator(id).is_some() {
            Some(ComponentKind::Actuator)
        } else {
            None
        }
    }

    pub fn component_ids(&self) -> impl Iterator<Item = &ComponentId> {
        self.sensors
            .iter()
            .map(|s| &s.id)
            .chain(self.context_operators.iter().map(|c| &c.id))
            .chain(self.control_operators.iter().map(|c| &c.id))
            .chain(self.actuators.iter().map(|a| &a.id))
    }

    pub fn source(&self, r: &SourceRef) -> Option<&SensorSource> {
        self.sensor(&r.component)?
            .sources
            .iter()
            .find(|s| s.name == r.source)
    }

    pub fn source_refs(&self) -> impl Iterator<Item = SourceRef> + '_ {
        self.sensors.iter().flat_map(|s| {
            s.sources.iter().map(move |src| SourceRef {
                component: s.id.clone(),
                source: src.name.clone(),
            })
        })
    }

    pub fn type_decl(&self, t: &TypeName) -> Option<&TypeDecl> {
        self.types.iter().find(|d| &d.name == t)
    }

    fn is_declared_type(&self, t: &TypeName) -> bool {
        t.is_top() || self.type_decl(t).is_some()
    }

    /// Chain of supertypes from `t` up to and including the implicit top.
    /// Assumes the declared hierarchy is acyclic, which the parser enforces.
    fn ancestry(&self, t: &TypeName) -> Vec<TypeName> {
        let mut chain = vec![t.clone()];
        let mut cur = t.clone();
        while !cur.is_top() {
            match self.type_decl(&cur).and_then(|d| d.supertype.clone()) {
                Some(sup) => {
                    cur = sup;
                    chain.push(cur.clone());
                }
                None => {
                    chain.push(TypeName::top());
                    break;
                }
            }
        }
        chain
    }

    /// Least upper bound of two types in the declared single-inheritance
    /// lattice; the implicit top type at worst.
    pub fn lub(&self, t1: &TypeName, t2: &TypeName) -> Result<TypeName, ModelError> {
        if !self.is_declared_type(t1) {
            return Err(ModelError::UndeclaredType(t1.clone()));
        }
        if !self.is_declared_type(t2) {
            return Err(ModelError::UndeclaredType(t2.clone()));
        }
        let up1 = self.ancestry(t1);
        for candidate in self.ancestry(t2) {
            if up1.contains(&candidate) {
                return Ok(candidate);
            }
        }
        Ok(TypeName::top())
    }

    /// Whether a value of type `sub` is acceptable where `sup` is expected.
    pub fn assignable(&self, sub: &TypeName, sup: &TypeName) -> Result<bool, ModelError> {
        Ok(&self.lub(sub, sup)? == sup)
    }

    /// Children of a component: the sources of its incoming data-flow edges.
    ///
    /// Context operators contribute the names of their activations and data
    /// requirements, control operators their subscriptions, and actuators the
    /// controllers that order them. Sensors have no children.
    pub fn children(&self, id: &ComponentId) -> Result<BTreeSet<ChildRef>, ModelError> {
        if let Some(op) = self.context(id) {
            let mut out = BTreeSet::new();
            for basic in &op.contract.basics {
                for name in basic
                    .activation
                    .names()
                    .into_iter()
                    .chain(basic.requirements.names())
                {
                    if let Some(child) = name.as_child() {
                        out.insert(child);
                    }
                }
            }
            return Ok(out);
        }
        if let Some(ctl) = self.controller(id) {
            return Ok(ctl
                .subscriptions
                .iter()
                .map(|s| ChildRef::Operator(s.clone()))
                .collect());
        }
        if let Some(act) = self.actuator(id) {
            return Ok(self
                .control_operators
                .iter()
                .filter(|c| c.orders.iter().any(|o| o.actuator == act.id))
                .map(|c| ChildRef::Operator(c.id.clone()))
                .collect());
        }
        if self.sensor(id).is_some() {
            return Ok(BTreeSet::new());
        }
        Err(ModelError::UnknownComponent(id.clone()))
    }

    /// Context operators and controllers whose activation can consume a value
    /// pushed by `from`, in declaration order.
    pub fn push_parents(&self, from: &ChildRef) -> Vec<ComponentId> {
        let mut out = Vec::new();
        for op in &self.context_operators {
            let listens = op.contract.basics.iter().any(|b| match &b.activation {
                ActivationCondition::Push { terms } => {
                    terms.iter().any(|t| t.members.contains(from))
                }
                ActivationCondition::PullSelf => false,
            });
            if listens {
                out.push(op.id.clone());
            }
        }
        if let ChildRef::Operator(id) = from {
            for ctl in &self.control_operators {
                if ctl.subscriptions.contains(id) {
                    out.push(ctl.id.clone());
                }
            }
        }
        out
    }
}
