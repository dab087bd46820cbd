//! Design-time analyses: data reachability over the component graph, a
//! built-in explicit-state checker for response and absence invariants, and
//! Promela emission for external checking with SPIN.

mod checker;
mod flow;
mod invariant;
mod promela;

pub use checker::{check_on_model, CheckerConfig, Verdict, FAIRNESS_NOTE};
pub use flow::{build_model, FlowModel};
pub use invariant::{parse_invariant, parse_invariants, satisfied_by, Invariant, Predicate};
pub use promela::emit_promela;

use std::collections::VecDeque;

use crate::model::{Architecture, ChildRef, ComponentId};

/// Check one interaction invariant on the architecture's flow model.
pub fn check_invariant(
    arch: &Architecture,
    invariant: &Invariant,
    config: &CheckerConfig,
) -> Verdict {
    let model = build_model(arch, config.channel_capacity);
    check_on_model(&model, invariant, config)
}

/// One expansion step of the reachability relation. Sources are leaves;
/// components expand through their children: activation and requirement
/// names for context operators, subscriptions for controllers, ordering
/// controllers for actuators.
fn reach_children(arch: &Architecture, node: &ChildRef) -> Vec<ChildRef> {
    match node {
        ChildRef::Source(_) => Vec::new(),
        ChildRef::Operator(id) => arch
            .children(id)
            .map(|set| set.into_iter().collect())
            .unwrap_or_default(),
    }
}

/// Data reachability: is the data associated with `target` (a sensor source
/// or context operator) reachable from component `from`?
pub fn reachable(from: &ComponentId, target: &ChildRef, arch: &Architecture) -> bool {
    reach_witness(from, target, arch).is_some()
}

/// A shortest child-chain witnessing reachability, starting at `from` and
/// ending at `target`; `None` when the data is not reachable.
pub fn reach_witness(
    from: &ComponentId,
    target: &ChildRef,
    arch: &Architecture,
) -> Option<Vec<ChildRef>> {
    let start = ChildRef::Operator(from.clone());
    if &start == target {
        return Some(vec![start]);
    }
    let mut parent: std::collections::HashMap<ChildRef, ChildRef> =
        std::collections::HashMap::new();
    let mut queue = VecDeque::new();
    queue.push_back(start.clone());
    parent.insert(start.clone(), start.clone());
    while let Some(node) = queue.pop_front() {
        for child in reach_children(arch, &node) {
            if parent.contains_key(&child) {
                continue;
            }
            parent.insert(child.clone(), node.clone());
            if &child == target {
                let mut path = vec![child.clone()];
                let mut cur = child;
                while parent[&cur] != cur {
                    cur = parent[&cur].clone();
                    path.push(cur.clone());
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(child);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::SourceRef;

    fn op(id: &str) -> ComponentId {
        ComponentId::new(id)
    }

    #[test]
    fn reachable_is_reflexive() {
        let arch = fixtures::webserver();
        for id in arch.component_ids() {
            assert!(reachable(id, &ChildRef::Operator(id.clone()), &arch));
        }
    }

    #[test]
    fn logger_reaches_the_log_line() {
        let arch = fixtures::webserver();
        let line = ChildRef::Source(SourceRef::new("AccessLogReader", "line"));
        assert!(reachable(&op("Logger"), &line, &arch));
        let path = reach_witness(&op("Logger"), &line, &arch).unwrap();
        let rendered: Vec<String> = path.iter().map(|c| c.to_string()).collect();
        assert_eq!(
            rendered,
            vec![
                "Logger",
                "ProfileLogger",
                "AccessingProfile",
                "AccessLogParser",
                "AccessLogReader.line",
            ]
        );
    }

    #[test]
    fn webpage_updater_cannot_reach_profiles() {
        let arch = fixtures::webserver_topfive();
        let profiles = ChildRef::operator("AccessingProfile");
        assert!(!reachable(&op("WebPageUpdater"), &profiles, &arch));
        assert!(reach_witness(&op("WebPageUpdater"), &profiles, &arch).is_none());
    }

    #[test]
    fn self_witness_is_singleton() {
        let arch = fixtures::webserver();
        let path =
            reach_witness(&op("IP2Profile"), &ChildRef::operator("IP2Profile"), &arch).unwrap();
        assert_eq!(path.len(), 1);
    }

    #[test]
    fn reachability_terminates_on_requirement_cycles() {
        let src = r#"
architecture Cyclic;
type T;
context X : T pulled with () {
  contract on pull get(Y) no publish;
}
context Y : T pulled with () {
  contract on pull get(X) no publish;
}
"#;
        let arch = crate::parser::parse_str(src).unwrap();
        assert!(reachable(&op("X"), &ChildRef::operator("Y"), &arch));
        assert!(reachable(&op("X"), &ChildRef::operator("X"), &arch));
        assert!(!reachable(
            &op("X"),
            &ChildRef::Source(SourceRef::new("Nope", "nope")),
            &arch
        ));
    }

    /// Brute-force reflexive-transitive closure over the child relation,
    /// kept independent of the breadth-first implementation.
    fn closure_oracle(arch: &Architecture) -> std::collections::BTreeSet<(ChildRef, ChildRef)> {
        let mut nodes: Vec<ChildRef> = arch
            .component_ids()
            .map(|id| ChildRef::Operator(id.clone()))
            .collect();
        nodes.extend(arch.source_refs().map(ChildRef::Source));
        let mut pairs: std::collections::BTreeSet<(ChildRef, ChildRef)> =
            nodes.iter().map(|n| (n.clone(), n.clone())).collect();
        for n in &nodes {
            for c in reach_children(arch, n) {
                pairs.insert((n.clone(), c));
            }
        }
        loop {
            let mut added = false;
            let snapshot: Vec<(ChildRef, ChildRef)> = pairs.iter().cloned().collect();
            for (a, b) in &snapshot {
                for (c, d) in &snapshot {
                    if b == c && pairs.insert((a.clone(), d.clone())) {
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        pairs
    }

    #[test]
    fn agrees_with_transitive_closure_on_fixture() {
        let arch = fixtures::webserver_topfive();
        let oracle = closure_oracle(&arch);
        let mut targets: Vec<ChildRef> = arch
            .context_operators
            .iter()
            .map(|c| ChildRef::Operator(c.id.clone()))
            .collect();
        targets.extend(arch.source_refs().map(ChildRef::Source));
        for from in arch.component_ids() {
            for t in &targets {
                let expected = oracle.contains(&(ChildRef::Operator(from.clone()), t.clone()));
                assert_eq!(
                    reachable(from, t, &arch),
                    expected,
                    "reachable({from}, {t})"
                );
            }
        }
    }
}
