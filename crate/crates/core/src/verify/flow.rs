//! The flow model explored by the built-in checker: one process per basic
//! contract (plus controllers, actuators and sensor sources), one bounded
//! FIFO channel per component interaction edge.
//!
//! Values are abstracted to tokens, so the model captures control and
//! data-flow shape only. Pushes broadcast one token per outgoing edge in a
//! single step, joint activations consume one token per term in a single
//! step, and pull round-trips are request/response channel pairs.

use std::collections::BTreeMap;

use crate::model::{ActivationCondition, Architecture, ChildRef, ComponentId, Emission, TypeName};
use crate::sim::{Event, Value};

/// One bounded token channel.
#[derive(Debug, Clone)]
pub struct Channel {
    pub label: String,
    pub capacity: u8,
}

/// Guard and effect of one branch. Multi-channel guards are atomic: the
/// branch is enabled only when every listed channel satisfies the condition,
/// and firing updates them all at once.
#[derive(Debug, Clone)]
pub enum Guard {
    /// All listed channels nonempty; consume one token from each.
    RecvAll(Vec<usize>),
    /// All listed channels non-full; add one token to each. An empty list is
    /// always enabled (a publication no one consumes).
    SendAll(Vec<usize>),
    /// Internal step, always enabled.
    Tau,
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub guard: Guard,
    pub event: Option<Event>,
    pub next: usize,
}

/// A process: a small control-flow graph of guarded branches. `fair`
/// processes fall under the weak fairness assumption; sensor processes do
/// not, modelling an environment that may stall.
#[derive(Debug, Clone)]
pub struct Process {
    pub label: String,
    pub fair: bool,
    pub locations: Vec<Vec<Branch>>,
}

#[derive(Debug, Clone)]
pub struct FlowModel {
    pub channels: Vec<Channel>,
    pub processes: Vec<Process>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum ChannelKey {
    /// Push delivery from a child to one term of one basic contract.
    Push {
        from: ChildRef,
        to: ComponentId,
        basic: usize,
        term: usize,
    },
    /// Push delivery from a context operator to a subscribed controller.
    Subscription { from: ComponentId, to: ComponentId },
    /// An order from a controller to one actuator action.
    Order {
        from: ComponentId,
        to: ComponentId,
        action: String,
    },
    /// Pull request channel from one basic contract to a child.
    PullGet {
        from: (ComponentId, usize),
        to: ChildRef,
    },
    /// Pull response channel back to the requester.
    PullReturn {
        from: (ComponentId, usize),
        to: ChildRef,
    },
}

struct ModelBuilder<'a> {
    arch: &'a Architecture,
    capacity: u8,
    channels: Vec<Channel>,
    index: BTreeMap<ChannelKey, usize>,
}

impl<'a> ModelBuilder<'a> {
    fn channel(&mut self, key: ChannelKey) -> usize {
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let label = match &key {
            ChannelKey::Push {
                from,
                to,
                basic,
                term,
            } => format!("push:{from}->{to}/{basic}.{term}"),
            ChannelKey::Subscription { from, to } => format!("sub:{from}->{to}"),
            ChannelKey::Order { from, to, action } => format!("order:{from}->{to}.{action}"),
            ChannelKey::PullGet { from, to } => format!("get:{}/{}->{to}", from.0, from.1),
            ChannelKey::PullReturn { from, to } => format!("ret:{}/{}<-{to}", from.0, from.1),
        };
        let i = self.channels.len();
        self.channels.push(Channel {
            label,
            capacity: self.capacity,
        });
        self.index.insert(key, i);
        i
    }

    /// Channels receiving a push from `child`, over all consumers.
    fn push_out_edges(&mut self, child: &ChildRef) -> Vec<usize> {
        let mut out = Vec::new();
        for op in &self.arch.context_operators {
            for (b, basic) in op.contract.basics.iter().enumerate() {
                if let ActivationCondition::Push { terms } = &basic.activation {
                    for (t, term) in terms.iter().enumerate() {
                        if term.members.contains(child) {
                            out.push(self.channel(ChannelKey::Push {
                                from: child.clone(),
                                to: op.id.clone(),
                                basic: b,
                                term: t,
                            }));
                        }
                    }
                }
            }
        }
        if let ChildRef::Operator(id) = child {
            for ctl in &self.arch.control_operators {
                if ctl.subscriptions.contains(id) {
                    out.push(self.channel(ChannelKey::Subscription {
                        from: id.clone(),
                        to: ctl.id.clone(),
                    }));
                }
            }
        }
        out
    }

    /// Requesters pulling `child`: every basic contract listing it as a data
    /// requirement, in declaration order.
    fn pull_requesters(&self, child: &ChildRef) -> Vec<(ComponentId, usize)> {
        let mut out = Vec::new();
        for op in &self.arch.context_operators {
            for (b, basic) in op.contract.basics.iter().enumerate() {
                if basic.requirements.targets.contains(child) {
                    out.push((op.id.clone(), b));
                }
            }
        }
        out
    }
}

fn token(ty: &TypeName) -> Value {
    Value::typed(ty.clone(), "1")
}

/// Build the flow model of a resolved architecture.
pub fn build_model(arch: &Architecture, capacity: u8) -> FlowModel {
    let mut b = ModelBuilder {
        arch,
        capacity: capacity.max(1),
        channels: Vec::new(),
        index: BTreeMap::new(),
    };
    let mut processes = Vec::new();

    // Sensor sources. Spontaneous pushes belong to the environment, which
    // may stall, so the push generator is exempt from fairness. Answering a
    // pull is framework machinery and must make progress, so the server is a
    // separate, fair process.
    for sensor in &arch.sensors {
        for src in &sensor.sources {
            let child = ChildRef::Source(crate::model::SourceRef {
                component: sensor.id.clone(),
                source: src.name.clone(),
            });
            // Even a source nobody listens to may publish (a scenario can
            // stimulate it), so the push branch always exists; without
            // consumers it is a visible self-loop.
            let out = b.push_out_edges(&child);
            let source_ref = crate::model::SourceRef {
                component: sensor.id.clone(),
                source: src.name.clone(),
            };
            processes.push(Process {
                label: format!("{}.{}", sensor.id, src.name),
                fair: false,
                locations: vec![vec![Branch {
                    guard: Guard::SendAll(out),
                    event: Some(Event::SourcePublished {
                        source: source_ref,
                        value: token(&src.value_type),
                    }),
                    next: 0,
                }]],
            });
            let requesters = b.pull_requesters(&child);
            if !requesters.is_empty() {
                let mut locations: Vec<Vec<Branch>> = vec![Vec::new()];
                for requester in requesters {
                    let get = b.channel(ChannelKey::PullGet {
                        from: requester.clone(),
                        to: child.clone(),
                    });
                    let ret = b.channel(ChannelKey::PullReturn {
                        from: requester.clone(),
                        to: child.clone(),
                    });
                    let serve_loc = locations.len();
                    locations.push(vec![Branch {
                        guard: Guard::SendAll(vec![ret]),
                        event: None,
                        next: 0,
                    }]);
                    locations[0].push(Branch {
                        guard: Guard::RecvAll(vec![get]),
                        event: None,
                        next: serve_loc,
                    });
                }
                processes.push(Process {
                    label: format!("{}.{}.serve", sensor.id, src.name),
                    fair: true,
                    locations,
                });
            }
        }
    }

    // One process per basic contract of each context operator.
    for op in &arch.context_operators {
        for (basic_idx, basic) in op.contract.basics.iter().enumerate() {
            let label = if op.contract.basics.len() == 1 {
                op.id.to_string()
            } else {
                format!("{}/{}", op.id, basic_idx)
            };
            let mut locations: Vec<Vec<Branch>> = vec![Vec::new()];
            match &basic.activation {
                ActivationCondition::Push { terms } => {
                    // One activation branch per choice of disjunction member.
                    let mut selections: Vec<Vec<usize>> = vec![Vec::new()];
                    for (t, term) in terms.iter().enumerate() {
                        let mut next_selections = Vec::new();
                        for sel in &selections {
                            for member in &term.members {
                                let ch = b.channel(ChannelKey::Push {
                                    from: member.clone(),
                                    to: op.id.clone(),
                                    basic: basic_idx,
                                    term: t,
                                });
                                let mut s = sel.clone();
                                s.push(ch);
                                next_selections.push(s);
                            }
                        }
                        selections = next_selections;
                    }
                    let body_start = build_requirement_chain(
                        &mut b,
                        &mut locations,
                        op,
                        basic_idx,
                        basic.emission,
                        None,
                    );
                    for channels in selections {
                        locations[0].push(Branch {
                            guard: Guard::RecvAll(channels),
                            event: Some(Event::OperatorActivated {
                                operator: op.id.clone(),
                                contract: basic_idx,
                            }),
                            next: body_start,
                        });
                    }
                }
                ActivationCondition::PullSelf => {
                    let child = ChildRef::Operator(op.id.clone());
                    for requester in b.pull_requesters(&child) {
                        let get = b.channel(ChannelKey::PullGet {
                            from: requester.clone(),
                            to: child.clone(),
                        });
                        let ret = b.channel(ChannelKey::PullReturn {
                            from: requester.clone(),
                            to: child.clone(),
                        });
                        let body_start = build_requirement_chain(
                            &mut b,
                            &mut locations,
                            op,
                            basic_idx,
                            basic.emission,
                            Some(ret),
                        );
                        locations[0].push(Branch {
                            guard: Guard::RecvAll(vec![get]),
                            event: Some(Event::OperatorActivated {
                                operator: op.id.clone(),
                                contract: basic_idx,
                            }),
                            next: body_start,
                        });
                    }
                }
            }
            processes.push(Process {
                label,
                fair: true,
                locations,
            });
        }
    }

    // Controllers: any subscription push triggers every declared order.
    for ctl in &arch.control_operators {
        let mut locations: Vec<Vec<Branch>> = vec![Vec::new()];
        let mut order_start = 0usize;
        if !ctl.orders.is_empty() {
            order_start = locations.len();
            for (i, order) in ctl.orders.iter().enumerate() {
                let ch = b.channel(ChannelKey::Order {
                    from: ctl.id.clone(),
                    to: order.actuator.clone(),
                    action: order.action.clone(),
                });
                let next = if i + 1 == ctl.orders.len() {
                    0
                } else {
                    order_start + i + 1
                };
                locations.push(vec![Branch {
                    guard: Guard::SendAll(vec![ch]),
                    event: None,
                    next,
                }]);
            }
        }
        for sub in &ctl.subscriptions {
            let ch = b.channel(ChannelKey::Subscription {
                from: sub.clone(),
                to: ctl.id.clone(),
            });
            locations[0].push(Branch {
                guard: Guard::RecvAll(vec![ch]),
                event: Some(Event::OperatorActivated {
                    operator: ctl.id.clone(),
                    contract: 0,
                }),
                next: if ctl.orders.is_empty() {
                    0
                } else {
                    order_start
                },
            });
        }
        processes.push(Process {
            label: ctl.id.to_string(),
            fair: true,
            locations,
        });
    }

    // Actuators: consume orders, one action invocation per token.
    for act in &arch.actuators {
        let mut branches = Vec::new();
        for ctl in &arch.control_operators {
            for order in &ctl.orders {
                if order.actuator == act.id {
                    let ch = b.channel(ChannelKey::Order {
                        from: ctl.id.clone(),
                        to: act.id.clone(),
                        action: order.action.clone(),
                    });
                    let param = act
                        .actions
                        .iter()
                        .find(|a| a.name == order.action)
                        .and_then(|a| a.param_types.first())
                        .cloned()
                        .unwrap_or_else(TypeName::top);
                    branches.push(Branch {
                        guard: Guard::RecvAll(vec![ch]),
                        event: Some(Event::ActionInvoked {
                            actuator: act.id.clone(),
                            action: order.action.clone(),
                            args: vec![token(&param)],
                        }),
                        next: 0,
                    });
                }
            }
        }
        processes.push(Process {
            label: act.id.to_string(),
            fair: true,
            locations: vec![branches],
        });
    }

    FlowModel {
        channels: b.channels,
        processes,
    }
}

/// Append the body of one activation: the mandatory pull round-trips in
/// declaration order, then the emission, then (for pull contracts) the
/// response send. Returns the entry location of the chain.
fn build_requirement_chain(
    b: &mut ModelBuilder<'_>,
    locations: &mut Vec<Vec<Branch>>,
    op: &crate::model::ContextOperator,
    basic_idx: usize,
    emission: Emission,
    reply: Option<usize>,
) -> usize {
    let basic = &op.contract.basics[basic_idx];
    let me = (op.id.clone(), basic_idx);
    let n_req = basic.requirements.targets.len();

    // Layout: [entry .. entry+2n) pull steps, then the emission location,
    // then (for pull contracts) the response send.
    let entry = locations.len();
    let emission_loc = entry + 2 * n_req;
    let reply_loc = emission_loc + 1;
    let done = if reply.is_some() { reply_loc } else { 0 };

    for (i, target) in basic.requirements.targets.iter().enumerate() {
        let get = b.channel(ChannelKey::PullGet {
            from: me.clone(),
            to: target.clone(),
        });
        let ret = b.channel(ChannelKey::PullReturn {
            from: me.clone(),
            to: target.clone(),
        });
        let args = crate::denote::args_of(target, b.arch)
            .unwrap_or_default()
            .iter()
            .map(token)
            .collect();
        locations.push(vec![Branch {
            guard: Guard::SendAll(vec![get]),
            event: Some(Event::PullIssued {
                from: Some(op.id.clone()),
                to: target.clone(),
                args,
            }),
            next: entry + 2 * i + 1,
        }]);
        locations.push(vec![Branch {
            guard: Guard::RecvAll(vec![ret]),
            event: Some(Event::PullReturned {
                from: Some(op.id.clone()),
                to: target.clone(),
                value: token(&crate::denote::typeof_child(target, b.arch)),
            }),
            next: entry + 2 * i + 2,
        }]);
    }

    let publish_event = Event::ValuePublished {
        operator: op.id.clone(),
        value: token(&op.value_type),
    };
    let out = b.push_out_edges(&ChildRef::Operator(op.id.clone()));
    let emission_branches = match emission {
        Emission::Always => vec![Branch {
            guard: Guard::SendAll(out),
            event: Some(publish_event),
            next: done,
        }],
        Emission::Maybe => vec![
            Branch {
                guard: Guard::SendAll(out),
                event: Some(publish_event),
                next: done,
            },
            Branch {
                guard: Guard::Tau,
                event: None,
                next: done,
            },
        ],
        Emission::Never => vec![Branch {
            guard: Guard::Tau,
            event: None,
            next: done,
        }],
    };
    debug_assert_eq!(locations.len(), emission_loc);
    locations.push(emission_branches);

    if let Some(ret) = reply {
        debug_assert_eq!(locations.len(), reply_loc);
        locations.push(vec![Branch {
            guard: Guard::SendAll(vec![ret]),
            event: None,
            next: 0,
        }]);
    }
    entry
}
