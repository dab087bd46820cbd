//! Contract-enforcing runtime simulator.
//!
//! The simulator interprets a checked architecture directly from its
//! framework manifest: application logic is supplied as handlers bound to the
//! manifest's abstract methods, and every interaction a handler performs goes
//! through capability objects whose dynamic guards enforce the declared
//! contracts (communication integrity, emission fidelity, callback lifetime
//! and quota).
//!
//! Scheduling is deterministic: a single logical worker drains a FIFO of
//! pending component interactions, each component handles one interaction at
//! a time, and pull requests execute synchronously inside the requester's
//! turn. A seeded random draining order is available for robustness testing.

mod packs;
mod scenario;
mod trace;

pub use packs::{
    install_passthrough, install_passthrough_pulling, install_scripted, install_webserver_demo,
    MaybeMode,
};
pub use scenario::{parse_scenario, Scenario, ScenarioError, Step};
pub use trace::{Event, GuardReason, SimTrace, Value};

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::atomic::{AtomicBool, AtomicU32, Ordering};
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::check::{self, CheckReport};
use crate::manifest::{self, FrameworkManifest};
use crate::model::{
    ActivationCondition, Architecture, ChildRef, ComponentId, Emission, SourceRef, TypeName,
};

/// Error produced by host-provided handler bodies.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{0}")]
pub struct HandlerFault(pub String);

impl HandlerFault {
    pub fn new(msg: impl Into<String>) -> Self {
        HandlerFault(msg.into())
    }
}

impl From<SimError> for HandlerFault {
    fn from(e: SimError) -> Self {
        HandlerFault(e.to_string())
    }
}

pub type HandlerBody =
    Box<dyn FnMut(&mut ActivationScope<'_>) -> Result<Option<Value>, HandlerFault> + Send>;
pub type SourceResponder = Box<dyn FnMut(&[Value]) -> Result<Value, HandlerFault> + Send>;
pub type ActionStub = Box<dyn FnMut(&[Value]) + Send>;

/// Implementation of one abstract method of the manifest. The declared shape
/// (whether the body returns a value) is validated against the descriptor at
/// registration time.
pub struct Handler {
    pub operator: ComponentId,
    pub method: String,
    pub returns_value: bool,
    pub body: HandlerBody,
}

impl Handler {
    pub fn new(
        operator: impl Into<String>,
        method: impl Into<String>,
        returns_value: bool,
        body: impl FnMut(&mut ActivationScope<'_>) -> Result<Option<Value>, HandlerFault>
            + Send
            + 'static,
    ) -> Self {
        Handler {
            operator: ComponentId::new(operator),
            method: method.into(),
            returns_value,
            body: Box::new(body),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("architecture fails its static checks")]
    ChecksFailed(CheckReport),
    #[error("no descriptor `{method}` on operator `{operator}`")]
    UnknownDescriptor {
        operator: ComponentId,
        method: String,
    },
    #[error("descriptor `{method}` on `{operator}` is already bound")]
    DuplicateBinding {
        operator: ComponentId,
        method: String,
    },
    #[error("handler shape mismatch for `{operator}.{method}`: descriptor {expectation}")]
    ShapeMismatch {
        operator: ComponentId,
        method: String,
        expectation: String,
    },
    #[error("unbound descriptors: {0:?}")]
    HandlersMissing(Vec<String>),
    #[error("unknown source `{0}`")]
    UnknownSource(SourceRef),
    #[error("unknown component `{0}`")]
    UnknownComponent(ComponentId),
    #[error("stimulus for `{source_ref}` has type `{got}` but the source delivers `{expected}`")]
    StimulusTypeMismatch {
        source_ref: SourceRef,
        expected: TypeName,
        got: TypeName,
    },
    #[error("`{0}` has no pull contract")]
    NoPullContract(ComponentId),
    #[error("pull of {target} with {got} arguments where {expected} are declared")]
    PullArityMismatch {
        target: String,
        expected: usize,
        got: usize,
    },
    #[error("pull argument {index} of {target} has type `{got}`, expected `{expected}`")]
    PullArgTypeMismatch {
        target: String,
        index: usize,
        expected: TypeName,
        got: TypeName,
    },
    #[error("`{operator}` may not pull `{child}`: not a data requirement of the active contract")]
    NotARequirement {
        operator: ComponentId,
        child: String,
    },
    #[error("pull cycle: {}", chain.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(" -> "))]
    PullCycle { chain: Vec<ComponentId> },
    #[error("source `{0}` has no responder and no previously pushed value")]
    NoSourceValue(SourceRef),
    #[error("callback `{callback}` of `{operator}` rejected: {reason}")]
    Guard {
        operator: ComponentId,
        callback: String,
        reason: GuardReason,
    },
    #[error("`{operator}` has no publish callback (emission is not optional)")]
    NoPublishCallback { operator: ComponentId },
    #[error("`{operator}` published `{got}` but its declared type is `{expected}`")]
    PublishTypeMismatch {
        operator: ComponentId,
        expected: TypeName,
        got: TypeName,
    },
    #[error("handler of `{operator}` failed: {message}")]
    HandlerFailed {
        operator: ComponentId,
        message: String,
    },
}

/// Queue discipline for joint push activations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SyncPolicy {
    /// Every value is queued; firing consumes one value per term queue.
    #[default]
    QueueAll,
    /// Only the most recent value per term is kept.
    KeepLatest,
}

/// Order in which pending component interactions are drained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheduler {
    #[default]
    Fifo,
    SeededRandom(u64),
}

#[derive(Debug, Clone, Default)]
pub struct SimConfig {
    pub sync_policy: SyncPolicy,
    pub sync_overrides: BTreeMap<ComponentId, SyncPolicy>,
    pub scheduler: Scheduler,
}

/// Outcome of one run: the trace plus any recorded failures (handler faults,
/// guard violations that aborted an activation, scenario step errors).
#[derive(Debug, Clone)]
pub struct SimReport {
    pub trace: SimTrace,
    pub failures: Vec<String>,
}

impl SimReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Guard state of one activation. Callback tokens hold a reference to their
/// frame; once the activation completes the frame dies and every token
/// created from it is rejected as stale. The atomics exist only so tokens
/// stay `Send`; the simulator itself is single-threaded.
struct Frame {
    operator: ComponentId,
    live: AtomicBool,
    publish_count: AtomicU32,
    publish_max: Option<u32>,
    can_publish: bool,
}

/// Capability to publish the operator's value, handed to handlers of
/// contracts with optional emission. Cloneable and storable; invoking it
/// after its activation completes only produces a guard violation.
#[derive(Clone)]
pub struct PublishCallback {
    frame: Arc<Frame>,
}

impl PublishCallback {
    pub fn invoke(&self, scope: &mut ActivationScope<'_>, value: Value) -> Result<(), SimError> {
        scope.sim.callback_publish(&self.frame, value)
    }
}

/// Capability to pull one declared data requirement.
#[derive(Clone)]
pub struct PullCallback {
    frame: Arc<Frame>,
    name: String,
    target: ChildRef,
}

impl PullCallback {
    pub fn invoke(
        &self,
        scope: &mut ActivationScope<'_>,
        args: &[Value],
    ) -> Result<Value, SimError> {
        if !self.frame.live.load(Ordering::Relaxed) {
            return scope
                .sim
                .guard_violation(&self.frame.operator, &self.name, GuardReason::Stale);
        }
        scope
            .sim
            .execute_pull(Some(self.frame.operator.clone()), &self.target, args)
    }
}

/// The view a handler gets of its activation: the delivered values plus the
/// capability objects of its contract. Handlers never receive references to
/// other components.
pub struct ActivationScope<'a> {
    sim: &'a mut Simulator,
    frame: Arc<Frame>,
    operator: ComponentId,
    basic: usize,
    values: Vec<Value>,
}

impl ActivationScope<'_> {
    /// Activation values (one per push term) or pull request arguments.
    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn value(&self, index: usize) -> &Value {
        &self.values[index]
    }

    pub fn operator(&self) -> &ComponentId {
        &self.operator
    }

    /// The operator's most recent computed value from earlier activations.
    pub fn latest_self(&self) -> Option<Value> {
        self.sim.latest.get(&self.operator).cloned()
    }

    /// Pull a declared data requirement. `child` uses the declaration
    /// surface: `IP2Profile` or `NSLookup.ip2host`.
    pub fn pull(&mut self, child: &str, args: &[Value]) -> Result<Value, SimError> {
        let target = self.require_child(child)?;
        self.sim
            .execute_pull(Some(self.operator.clone()), &target, args)
    }

    /// Publish the operator's value through its optional-emission callback.
    pub fn publish(&mut self, value: Value) -> Result<(), SimError> {
        if !self.frame.can_publish {
            return Err(SimError::NoPublishCallback {
                operator: self.operator.clone(),
            });
        }
        self.sim.callback_publish(&self.frame, value)
    }

    /// A pull capability that can be stored by the handler; the dynamic guard
    /// rejects invocations after the activation completes.
    pub fn pull_callback(&mut self, child: &str) -> Result<PullCallback, SimError> {
        let target = self.require_child(child)?;
        Ok(PullCallback {
            frame: self.frame.clone(),
            name: crate::denote::callback_name(&target),
            target,
        })
    }

    /// The publish capability as a storable token.
    pub fn publish_callback(&mut self) -> Result<PublishCallback, SimError> {
        if !self.frame.can_publish {
            return Err(SimError::NoPublishCallback {
                operator: self.operator.clone(),
            });
        }
        Ok(PublishCallback {
            frame: self.frame.clone(),
        })
    }

    fn require_child(&self, child: &str) -> Result<ChildRef, SimError> {
        let op = self
            .sim
            .arch
            .context(&self.operator)
            .expect("scope operator exists");
        let targets = &op.contract.basics[self.basic].requirements.targets;
        match targets.iter().find(|t| t.to_string() == child) {
            Some(t) => Ok(t.clone()),
            None => Err(SimError::NotARequirement {
                operator: self.operator.clone(),
                child: child.to_string(),
            }),
        }
    }
}

enum Pending {
    Activation {
        operator: ComponentId,
        basic: usize,
        values: Vec<Value>,
    },
    ControllerActivation {
        controller: ComponentId,
        value: Value,
    },
    Action {
        actuator: ComponentId,
        action: String,
        args: Vec<Value>,
    },
}

/// Deterministic interpreter of one architecture. Confined to one logical
/// thread of control; it may be moved between threads but not shared.
pub struct Simulator {
    arch: Architecture,
    manifest: FrameworkManifest,
    config: SimConfig,
    handlers: HashMap<(ComponentId, String), Handler>,
    responders: HashMap<SourceRef, SourceResponder>,
    action_stubs: HashMap<(ComponentId, String), ActionStub>,
    queues: HashMap<(ComponentId, usize, usize), VecDeque<Value>>,
    pending: VecDeque<Pending>,
    trace: Vec<Event>,
    failures: Vec<String>,
    latest: HashMap<ComponentId, Value>,
    latest_source: HashMap<SourceRef, Value>,
    pull_stack: Vec<ComponentId>,
    rng: Option<StdRng>,
}

impl Simulator {
    /// Build a simulator for a checked architecture. Consistency or
    /// determinacy failures are rejected here, so every run starts from a
    /// sound contract set.
    pub fn new(arch: Architecture, config: SimConfig) -> Result<Self, SimError> {
        let report = CheckReport::merge([
            check::check_architecture_consistency(&arch),
            check::check_determinacy(&arch),
        ]);
        if !report.passed() {
            return Err(SimError::ChecksFailed(report));
        }
        let manifest = manifest::generate_manifest(&arch).map_err(|e| match e {
            manifest::GenerateError::ChecksFailed(r) => SimError::ChecksFailed(r),
            manifest::GenerateError::Denote(_) => SimError::ChecksFailed(report),
        })?;
        let mut sim = Simulator {
            arch,
            manifest,
            config,
            handlers: HashMap::new(),
            responders: HashMap::new(),
            action_stubs: HashMap::new(),
            queues: HashMap::new(),
            pending: VecDeque::new(),
            trace: Vec::new(),
            failures: Vec::new(),
            latest: HashMap::new(),
            latest_source: HashMap::new(),
            pull_stack: Vec::new(),
            rng: None,
        };
        sim.reset();
        Ok(sim)
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn manifest(&self) -> &FrameworkManifest {
        &self.manifest
    }

    /// Bind a handler to a manifest descriptor.
    pub fn register_handler(&mut self, handler: Handler) -> Result<(), SimError> {
        let entry = self.manifest.operator(&handler.operator).ok_or_else(|| {
            SimError::UnknownDescriptor {
                operator: handler.operator.clone(),
                method: handler.method.clone(),
            }
        })?;
        let descriptor = entry
            .abstract_methods
            .iter()
            .find(|m| m.name == handler.method)
            .ok_or_else(|| SimError::UnknownDescriptor {
                operator: handler.operator.clone(),
                method: handler.method.clone(),
            })?;
        let wants_value = descriptor.return_type != crate::denote::TypeTerm::Unit;
        if wants_value != handler.returns_value {
            let expectation = if wants_value {
                "returns a value".to_string()
            } else {
                "returns unit".to_string()
            };
            return Err(SimError::ShapeMismatch {
                operator: handler.operator.clone(),
                method: handler.method.clone(),
                expectation,
            });
        }
        let key = (handler.operator.clone(), handler.method.clone());
        if self.handlers.contains_key(&key) {
            return Err(SimError::DuplicateBinding {
                operator: handler.operator.clone(),
                method: handler.method.clone(),
            });
        }
        self.handlers.insert(key, handler);
        Ok(())
    }

    /// Provide the pull behavior of a sensor source. Without a responder a
    /// pulled source answers with its most recently pushed value.
    pub fn register_source_responder(
        &mut self,
        source: SourceRef,
        responder: SourceResponder,
    ) -> Result<(), SimError> {
        if self.arch.source(&source).is_none() {
            return Err(SimError::UnknownSource(source));
        }
        self.responders.insert(source, responder);
        Ok(())
    }

    pub fn has_source_responder(&self, source: &SourceRef) -> bool {
        self.responders.contains_key(source)
    }

    /// Attach an observer to an actuator action. Actions without stubs only
    /// record their invocation in the trace.
    pub fn register_action_stub(
        &mut self,
        actuator: impl Into<String>,
        action: impl Into<String>,
        stub: ActionStub,
    ) -> Result<(), SimError> {
        let actuator = ComponentId::new(actuator);
        let action = action.into();
        let declared = self
            .arch
            .actuator(&actuator)
            .map(|a| a.actions.iter().any(|x| x.name == action))
            .unwrap_or(false);
        if !declared {
            return Err(SimError::UnknownComponent(actuator));
        }
        self.action_stubs.insert((actuator, action), stub);
        Ok(())
    }

    /// Descriptors that still need a handler, as `Operator.method` strings.
    pub fn unbound_descriptors(&self) -> Vec<String> {
        let mut out = Vec::new();
        for entry in &self.manifest.operators {
            for method in &entry.abstract_methods {
                let key = (entry.operator.clone(), method.name.clone());
                if !self.handlers.contains_key(&key) {
                    out.push(format!("{}.{}", entry.operator, method.name));
                }
            }
        }
        out
    }

    /// Clear all per-run state (queues, pending work, trace, caches).
    pub fn reset(&mut self) {
        self.queues.clear();
        for op in &self.arch.context_operators {
            for (b, basic) in op.contract.basics.iter().enumerate() {
                if let ActivationCondition::Push { terms } = &basic.activation {
                    for t in 0..terms.len() {
                        self.queues.insert((op.id.clone(), b, t), VecDeque::new());
                    }
                }
            }
        }
        self.pending.clear();
        self.trace.clear();
        self.failures.clear();
        self.latest.clear();
        self.latest_source.clear();
        self.pull_stack.clear();
        self.rng = match self.config.scheduler {
            Scheduler::Fifo => None,
            Scheduler::SeededRandom(seed) => Some(StdRng::seed_from_u64(seed)),
        };
    }

    /// Pending queue depths of one operator, per basic contract and term;
    /// instrumentation for the synchronization semantics.
    pub fn queue_depths(&self, op: &ComponentId) -> Vec<Vec<usize>> {
        let Some(ctx) = self.arch.context(op) else {
            return Vec::new();
        };
        ctx.contract
            .basics
            .iter()
            .enumerate()
            .map(|(b, basic)| match &basic.activation {
                ActivationCondition::Push { terms } => (0..terms.len())
                    .map(|t| self.queues[&(op.clone(), b, t)].len())
                    .collect(),
                ActivationCondition::PullSelf => Vec::new(),
            })
            .collect()
    }

    /// Execute a whole scenario from a clean state.
    pub fn run(&mut self, scenario: &Scenario) -> Result<SimReport, SimError> {
        let unbound = self.unbound_descriptors();
        if !unbound.is_empty() {
            return Err(SimError::HandlersMissing(unbound));
        }
        self.reset();
        for step in &scenario.steps {
            match step {
                Step::Publish { source, value } => {
                    if let Err(e) = self.publish_stimulus(source, value.clone()) {
                        self.failures.push(e.to_string());
                    }
                }
                Step::Pull { target, args } => {
                    if let Err(e) = self.external_pull(target, args) {
                        self.failures.push(e.to_string());
                    }
                }
            }
        }
        Ok(self.report())
    }

    /// Take the accumulated trace and failures.
    pub fn report(&mut self) -> SimReport {
        SimReport {
            trace: SimTrace {
                events: std::mem::take(&mut self.trace),
            },
            failures: std::mem::take(&mut self.failures),
        }
    }

    /// Inject one sensor stimulus and drain all resulting work.
    pub fn publish_stimulus(&mut self, source: &SourceRef, value: Value) -> Result<(), SimError> {
        let src = self
            .arch
            .source(source)
            .ok_or_else(|| SimError::UnknownSource(source.clone()))?;
        if value.ty != src.value_type {
            return Err(SimError::StimulusTypeMismatch {
                source_ref: source.clone(),
                expected: src.value_type.clone(),
                got: value.ty,
            });
        }
        self.trace.push(Event::SourcePublished {
            source: source.clone(),
            value: value.clone(),
        });
        self.latest_source.insert(source.clone(), value.clone());
        self.route_value(&ChildRef::Source(source.clone()), value);
        self.drain();
        Ok(())
    }

    /// Pull a context operator from outside the architecture, as a parent
    /// would, and drain any work its emission scheduled.
    pub fn external_pull(
        &mut self,
        target: &ComponentId,
        args: &[Value],
    ) -> Result<Value, SimError> {
        if self.arch.context(target).is_none() {
            return Err(SimError::UnknownComponent(target.clone()));
        }
        let result = self.execute_pull(None, &ChildRef::Operator(target.clone()), args);
        self.drain();
        result
    }

    fn drain(&mut self) {
        while !self.pending.is_empty() {
            let index = match &mut self.rng {
                Some(rng) => rng.gen_range(0..self.pending.len()),
                None => 0,
            };
            let item = self.pending.remove(index).expect("index in range");
            match item {
                Pending::Activation {
                    operator,
                    basic,
                    values,
                } => {
                    if let Err(e) = self.execute_basic(&operator, basic, values) {
                        self.failures.push(e.to_string());
                    }
                }
                Pending::ControllerActivation { controller, value } => {
                    self.trace.push(Event::OperatorActivated {
                        operator: controller.clone(),
                        contract: 0,
                    });
                    let orders = self
                        .arch
                        .controller(&controller)
                        .expect("resolved architecture")
                        .orders
                        .clone();
                    for order in orders {
                        self.pending.push_back(Pending::Action {
                            actuator: order.actuator,
                            action: order.action,
                            args: vec![value.clone()],
                        });
                    }
                }
                Pending::Action {
                    actuator,
                    action,
                    args,
                } => {
                    self.trace.push(Event::ActionInvoked {
                        actuator: actuator.clone(),
                        action: action.clone(),
                        args: args.clone(),
                    });
                    if let Some(stub) = self.action_stubs.get_mut(&(actuator, action)) {
                        stub(&args);
                    }
                }
            }
        }
    }

    /// Run one activation of a context operator: invoke the bound handler
    /// under a fresh guard frame, validate the result shape, and apply the
    /// contract's emission.
    fn execute_basic(
        &mut self,
        op_id: &ComponentId,
        basic_idx: usize,
        values: Vec<Value>,
    ) -> Result<Option<Value>, SimError> {
        self.trace.push(Event::OperatorActivated {
            operator: op_id.clone(),
            contract: basic_idx,
        });
        let op = self.arch.context(op_id).expect("resolved architecture");
        let emission = op.contract.basics[basic_idx].emission;
        let value_type = op.value_type.clone();
        let is_pull = op.contract.basics[basic_idx].activation == ActivationCondition::PullSelf;
        let method = self
            .manifest
            .operator(op_id)
            .expect("manifest entry")
            .abstract_methods[basic_idx]
            .name
            .clone();
        let returns_value = emission == Emission::Always || is_pull;

        let frame = Arc::new(Frame {
            operator: op_id.clone(),
            live: AtomicBool::new(true),
            publish_count: AtomicU32::new(0),
            publish_max: Some(1),
            can_publish: emission == Emission::Maybe,
        });

        let key = (op_id.clone(), method.clone());
        let mut handler = self
            .handlers
            .remove(&key)
            .ok_or_else(|| SimError::HandlersMissing(vec![format!("{op_id}.{method}")]))?;
        let mut scope = ActivationScope {
            sim: self,
            frame: frame.clone(),
            operator: op_id.clone(),
            basic: basic_idx,
            values,
        };
        let result = (handler.body)(&mut scope);
        frame.live.store(false, Ordering::Relaxed);
        self.handlers.insert(key, handler);

        let returned = match result {
            Err(fault) => {
                return Err(self.handler_fault(op_id, fault.0));
            }
            Ok(v) => v,
        };

        let returned = match (returns_value, returned) {
            (true, Some(v)) => {
                if !self.arch.assignable(&v.ty, &value_type).unwrap_or(false) {
                    return Err(self.handler_fault(
                        op_id,
                        format!("returned `{}` where `{value_type}` was declared", v.ty),
                    ));
                }
                Some(v)
            }
            (false, None) => None,
            (true, None) => {
                return Err(
                    self.handler_fault(op_id, "returned no value for a value-returning descriptor")
                );
            }
            (false, Some(_)) => {
                return Err(self.handler_fault(op_id, "returned a value for a unit descriptor"));
            }
        };

        if let Some(v) = &returned {
            self.latest.insert(op_id.clone(), v.clone());
            if emission == Emission::Always {
                self.publish_value(op_id, v.clone());
            }
        }
        Ok(returned)
    }

    fn handler_fault(&mut self, op_id: &ComponentId, message: impl Into<String>) -> SimError {
        let message = message.into();
        self.trace.push(Event::HandlerFault {
            operator: op_id.clone(),
            message: message.clone(),
        });
        SimError::HandlerFailed {
            operator: op_id.clone(),
            message,
        }
    }

    /// Publish a value on behalf of an operator: record the event and feed
    /// every matching parent activation.
    fn publish_value(&mut self, op_id: &ComponentId, value: Value) {
        self.trace.push(Event::ValuePublished {
            operator: op_id.clone(),
            value: value.clone(),
        });
        self.latest.insert(op_id.clone(), value.clone());
        self.route_value(&ChildRef::Operator(op_id.clone()), value);
    }

    fn callback_publish(&mut self, frame: &Frame, value: Value) -> Result<(), SimError> {
        if !frame.live.load(Ordering::Relaxed) {
            return self.guard_violation(&frame.operator, "Publish", GuardReason::Stale);
        }
        if let Some(max) = frame.publish_max {
            if frame.publish_count.load(Ordering::Relaxed) >= max {
                return self.guard_violation(
                    &frame.operator,
                    "Publish",
                    GuardReason::QuotaExceeded,
                );
            }
        }
        let declared = self
            .arch
            .context(&frame.operator)
            .expect("resolved architecture")
            .value_type
            .clone();
        if !self.arch.assignable(&value.ty, &declared).unwrap_or(false) {
            return Err(SimError::PublishTypeMismatch {
                operator: frame.operator.clone(),
                expected: declared,
                got: value.ty,
            });
        }
        frame.publish_count.fetch_add(1, Ordering::Relaxed);
        self.publish_value(&frame.operator.clone(), value);
        Ok(())
    }

    fn guard_violation<T>(
        &mut self,
        operator: &ComponentId,
        callback: &str,
        reason: GuardReason,
    ) -> Result<T, SimError> {
        self.trace.push(Event::GuardViolation {
            operator: operator.clone(),
            callback: callback.to_string(),
            reason,
        });
        Err(SimError::Guard {
            operator: operator.clone(),
            callback: callback.to_string(),
            reason,
        })
    }

    /// Deliver a pushed value to every parent whose activation lists the
    /// emitter, then fire any joint activation whose term queues are all
    /// nonempty, consuming one value per queue.
    fn route_value(&mut self, from: &ChildRef, value: Value) {
        let ops: Vec<ComponentId> = self
            .arch
            .context_operators
            .iter()
            .map(|o| o.id.clone())
            .collect();
        for op_id in ops {
            let op = self.arch.context(&op_id).expect("resolved architecture");
            let policy = self
                .config
                .sync_overrides
                .get(&op_id)
                .copied()
                .unwrap_or(self.config.sync_policy);
            let mut fired: Vec<(usize, Vec<Value>)> = Vec::new();
            let mut enqueue: Vec<(usize, usize)> = Vec::new();
            for (b, basic) in op.contract.basics.iter().enumerate() {
                let ActivationCondition::Push { terms } = &basic.activation else {
                    continue;
                };
                for (t, term) in terms.iter().enumerate() {
                    if term.members.contains(from) {
                        enqueue.push((b, t));
                    }
                }
            }
            if enqueue.is_empty() {
                continue;
            }
            let term_counts: Vec<usize> = op
                .contract
                .basics
                .iter()
                .map(|basic| match &basic.activation {
                    ActivationCondition::Push { terms } => terms.len(),
                    ActivationCondition::PullSelf => 0,
                })
                .collect();
            let touched: Vec<usize> = {
                let mut bs: Vec<usize> = enqueue.iter().map(|(b, _)| *b).collect();
                bs.dedup();
                bs
            };
            for (b, t) in enqueue {
                let queue = self
                    .queues
                    .get_mut(&(op_id.clone(), b, t))
                    .expect("queues initialized");
                if policy == SyncPolicy::KeepLatest {
                    queue.clear();
                }
                queue.push_back(value.clone());
            }
            for b in touched {
                let n_terms = term_counts[b];
                loop {
                    let ready =
                        (0..n_terms).all(|t| !self.queues[&(op_id.clone(), b, t)].is_empty());
                    if !ready {
                        break;
                    }
                    let mut consumed = Vec::with_capacity(n_terms);
                    for t in 0..n_terms {
                        let queue = self
                            .queues
                            .get_mut(&(op_id.clone(), b, t))
                            .expect("queues initialized");
                        consumed.push(queue.pop_front().expect("checked nonempty"));
                    }
                    fired.push((b, consumed));
                }
            }
            for (b, values) in fired {
                self.pending.push_back(Pending::Activation {
                    operator: op_id.clone(),
                    basic: b,
                    values,
                });
            }
        }
        if let ChildRef::Operator(id) = from {
            for ctl in &self.arch.control_operators {
                if ctl.subscriptions.contains(id) {
                    self.pending.push_back(Pending::ControllerActivation {
                        controller: ctl.id.clone(),
                        value: value.clone(),
                    });
                }
            }
        }
    }

    /// Execute one pull request synchronously inside the requester's turn.
    /// `from` is `None` for external probes.
    fn execute_pull(
        &mut self,
        from: Option<ComponentId>,
        target: &ChildRef,
        args: &[Value],
    ) -> Result<Value, SimError> {
        match target {
            ChildRef::Source(source) => {
                let src = self
                    .arch
                    .source(source)
                    .ok_or_else(|| SimError::UnknownSource(source.clone()))?;
                let value_type = src.value_type.clone();
                let params = src.pull_params.clone();
                check_args(&self.arch, &source.to_string(), &params, args)?;
                if !self.responders.contains_key(source) && !self.latest_source.contains_key(source)
                {
                    return Err(SimError::NoSourceValue(source.clone()));
                }
                self.trace.push(Event::PullIssued {
                    from: from.clone(),
                    to: target.clone(),
                    args: args.to_vec(),
                });
                let value = if let Some(responder) = self.responders.get_mut(source) {
                    match responder(args) {
                        Ok(v) => v,
                        Err(fault) => {
                            let operator = source.component.clone();
                            return Err(self.handler_fault(&operator, fault.0));
                        }
                    }
                } else {
                    self.latest_source[source].clone()
                };
                if !self
                    .arch
                    .assignable(&value.ty, &value_type)
                    .unwrap_or(false)
                {
                    let operator = source.component.clone();
                    return Err(self.handler_fault(
                        &operator,
                        format!(
                            "source responder returned `{}` where `{value_type}` was declared",
                            value.ty
                        ),
                    ));
                }
                self.trace.push(Event::PullReturned {
                    from,
                    to: target.clone(),
                    value: value.clone(),
                });
                Ok(value)
            }
            ChildRef::Operator(op_id) => {
                let op = self
                    .arch
                    .context(op_id)
                    .ok_or_else(|| SimError::UnknownComponent(op_id.clone()))?;
                let Some((basic_idx, _)) = op.pull_basic() else {
                    return Err(SimError::NoPullContract(op_id.clone()));
                };
                let params = op.pull_args().to_vec();
                check_args(&self.arch, op_id.as_str(), &params, args)?;
                if self.pull_stack.contains(op_id) {
                    let mut chain = self.pull_stack.clone();
                    chain.push(op_id.clone());
                    return Err(SimError::PullCycle { chain });
                }
                self.trace.push(Event::PullIssued {
                    from: from.clone(),
                    to: target.clone(),
                    args: args.to_vec(),
                });
                self.pull_stack.push(op_id.clone());
                let result = self.execute_basic(op_id, basic_idx, args.to_vec());
                self.pull_stack.pop();
                let value = result?.expect("pull contracts always return a value");
                self.trace.push(Event::PullReturned {
                    from,
                    to: target.clone(),
                    value: value.clone(),
                });
                Ok(value)
            }
        }
    }
}

fn check_args(
    arch: &Architecture,
    target: &str,
    params: &[TypeName],
    args: &[Value],
) -> Result<(), SimError> {
    if params.len() != args.len() {
        return Err(SimError::PullArityMismatch {
            target: target.to_string(),
            expected: params.len(),
            got: args.len(),
        });
    }
    for (index, (param, arg)) in params.iter().zip(args).enumerate() {
        if !arch.assignable(&arg.ty, param).unwrap_or(false) {
            return Err(SimError::PullArgTypeMismatch {
                target: target.to_string(),
                index,
                expected: param.clone(),
                got: arg.ty.clone(),
            });
        }
    }
    Ok(())
}
