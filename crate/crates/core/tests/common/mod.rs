//! Helpers shared by the integration suites.

use std::collections::{BTreeSet, HashMap, VecDeque};

use scc_core::model::{Architecture, ChildRef, ComponentId, Emission};
use scc_core::sim::Event;

/// Reflexive-transitive closure over the child relation by naive fixpoint
/// iteration; the independent oracle for reachability tests.
pub fn closure_reachable(arch: &Architecture) -> BTreeSet<(String, String)> {
    let mut nodes: Vec<ChildRef> = arch
        .component_ids()
        .map(|id| ChildRef::Operator(id.clone()))
        .collect();
    nodes.extend(arch.source_refs().map(ChildRef::Source));

    let mut edges: Vec<(String, String)> = Vec::new();
    for node in &nodes {
        if let ChildRef::Operator(id) = node {
            if let Some(op) = arch.context(id) {
                for basic in &op.contract.basics {
                    for name in basic
                        .activation
                        .names()
                        .into_iter()
                        .chain(basic.requirements.names())
                    {
                        if let Some(child) = name.as_child() {
                            edges.push((node.to_string(), child.to_string()));
                        }
                    }
                }
            } else if let Some(ctl) = arch.controller(id) {
                for sub in &ctl.subscriptions {
                    edges.push((node.to_string(), sub.to_string()));
                }
            } else if arch.actuator(id).is_some() {
                for ctl in &arch.control_operators {
                    if ctl.orders.iter().any(|o| o.actuator == *id) {
                        edges.push((node.to_string(), ctl.id.to_string()));
                    }
                }
            }
        }
    }

    let mut closure: BTreeSet<(String, String)> = nodes
        .iter()
        .map(|n| (n.to_string(), n.to_string()))
        .collect();
    closure.extend(edges.iter().cloned());
    loop {
        let mut additions = Vec::new();
        for (a, b) in &closure {
            for (c, d) in &edges {
                if b == c && !closure.contains(&(a.clone(), d.clone())) {
                    additions.push((a.clone(), d.clone()));
                }
            }
        }
        if additions.is_empty() {
            break;
        }
        closure.extend(additions);
    }
    closure
}

/// Recover, for each optional-emission operator, the publish decisions taken
/// along an event sequence: activation k published iff a publication for the
/// operator appears before its activation k+1.
pub fn maybe_decisions(
    arch: &Architecture,
    events: &[Event],
) -> HashMap<ComponentId, VecDeque<bool>> {
    let mut scripts: HashMap<ComponentId, VecDeque<bool>> = HashMap::new();
    for op in &arch.context_operators {
        if !op
            .contract
            .basics
            .iter()
            .any(|b| b.emission == Emission::Maybe)
        {
            continue;
        }
        let mut decisions = VecDeque::new();
        let mut active = false;
        let mut published = false;
        for e in events {
            match e {
                Event::OperatorActivated { operator, .. } if operator == &op.id => {
                    if active {
                        decisions.push_back(published);
                    }
                    active = true;
                    published = false;
                }
                Event::ValuePublished { operator, .. } if operator == &op.id => {
                    published = true;
                }
                _ => {}
            }
        }
        if active {
            decisions.push_back(published);
        }
        scripts.insert(op.id.clone(), decisions);
    }
    scripts
}
