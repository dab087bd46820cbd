//! Architecture-level judgments: contract and architecture consistency,
//! interference and determinacy, and the typing rules for orders,
//! disjunctions and pull declarations.
//!
//! Checks never fault on a resolved architecture; failures are reported as
//! findings.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{
    ActivationCondition, Architecture, BasicContract, ChildRef, ComponentId, ContextOperator,
    Emission, Name, TypeName,
};
use crate::parser::Severity;

/// Stable rule identifiers, used in reports and asserted by the test suites.
pub mod rules {
    pub const REQUIREMENT_NEEDS_PULL_SELF: &str = "requirement-needs-pull-self";
    pub const ACTIVATION_NEEDS_EMISSION: &str = "activation-needs-emission";
    pub const CONTRACT_INTERFERENCE: &str = "contract-interference";
    pub const ORDER_TYPE_MISMATCH: &str = "order-type-mismatch";
    pub const ORDER_ARITY_MISMATCH: &str = "order-arity-mismatch";
    pub const DISJUNCTION_WIDENS_TO_TOP: &str = "disjunction-widens-to-top";
    pub const UNUSED_PULL_PARAMS: &str = "unused-pull-params";
    pub const REQUIREMENT_CYCLE: &str = "requirement-cycle";
}

/// One finding of a check. `witness` carries the pair of basic contract
/// indices for determinacy violations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub rule: String,
    pub severity: Severity,
    pub subject: ComponentId,
    pub message: String,
    pub witness: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of one or more checks. The verdict is `Fail` exactly when some
/// finding is error-level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub findings: Vec<Finding>,
}

impl CheckReport {
    fn from_findings(findings: Vec<Finding>) -> Self {
        let verdict = if findings.iter().any(|f| f.severity == Severity::Error) {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        CheckReport { verdict, findings }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn merge(reports: impl IntoIterator<Item = CheckReport>) -> CheckReport {
        let findings: Vec<Finding> = reports.into_iter().flat_map(|r| r.findings).collect();
        CheckReport::from_findings(findings)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
    }
}

fn error(rule: &'static str, subject: &ComponentId, message: String) -> Finding {
    Finding {
        rule: rule.to_string(),
        severity: Severity::Error,
        subject: subject.clone(),
        message,
        witness: None,
    }
}

fn warning(rule: &'static str, subject: &ComponentId, message: String) -> Finding {
    Finding {
        rule: rule.to_string(),
        severity: Severity::Warning,
        subject: subject.clone(),
        message,
        witness: None,
    }
}

fn has_pull_self(op: &ContextOperator) -> bool {
    op.pull_basic().is_some()
}

fn emits(op: &ContextOperator) -> bool {
    op.contract
        .basics
        .iter()
        .any(|b| matches!(b.emission, Emission::Always | Emission::Maybe))
}

/// Contract consistency of one context operator relative to the architecture:
/// every pulled context operator must have a pull contract, and every context
/// operator in a push activation must have an emitting contract. A parallel
/// composition is consistent when each member is.
pub fn check_contract_consistency(op: &ContextOperator, arch: &Architecture) -> CheckReport {
    let mut findings = Vec::new();
    for basic in &op.contract.basics {
        for target in &basic.requirements.targets {
            if let ChildRef::Operator(child) = target {
                let child_op = arch.context(child).expect("resolved architecture");
                if !has_pull_self(child_op) {
                    findings.push(error(
                        rules::REQUIREMENT_NEEDS_PULL_SELF,
                        &op.id,
                        format!(
                            "`{}` pulls from `{child}`, which has no pull-activated contract",
                            op.id
                        ),
                    ));
                }
            }
        }
        if let ActivationCondition::Push { .. } = basic.activation {
            for name in basic.activation.names() {
                if let Name::Operator(child) = name {
                    let child_op = arch.context(&child).expect("resolved architecture");
                    if !emits(child_op) {
                        findings.push(error(
                            rules::ACTIVATION_NEEDS_EMISSION,
                            &op.id,
                            format!(
                                "`{}` is push-activated by `{child}`, which never publishes",
                                op.id
                            ),
                        ));
                    }
                }
            }
        }
    }
    CheckReport::from_findings(findings)
}

/// Architecture consistency: the conjunction of contract consistency over all
/// context operators, plus the same push rule applied to controller
/// subscriptions (a controller is a degenerate push-activated consumer).
pub fn check_architecture_consistency(arch: &Architecture) -> CheckReport {
    let mut reports: Vec<CheckReport> = arch
        .context_operators
        .iter()
        .map(|op| check_contract_consistency(op, arch))
        .collect();
    let mut findings = Vec::new();
    for ctl in &arch.control_operators {
        for sub in &ctl.subscriptions {
            let child_op = arch.context(sub).expect("resolved architecture");
            if !emits(child_op) {
                findings.push(error(
                    rules::ACTIVATION_NEEDS_EMISSION,
                    &ctl.id,
                    format!("`{}` subscribes to `{sub}`, which never publishes", ctl.id),
                ));
            }
        }
    }
    reports.push(CheckReport::from_findings(findings));
    CheckReport::merge(reports)
}

/// Two basic contracts interfere when their activation name sets intersect;
/// self markers compare equal to each other.
pub fn interferes(c1: &BasicContract, c2: &BasicContract) -> bool {
    let n1 = c1.activation.names();
    let n2 = c2.activation.names();
    n1.intersection(&n2).next().is_some()
}

/// Determinacy: no two basic contracts of one operator may be activated by
/// the same data flow. Findings carry the witnessing pair of contract
/// indices.
pub fn check_determinacy(arch: &Architecture) -> CheckReport {
    let mut findings = Vec::new();
    for op in &arch.context_operators {
        let basics = &op.contract.basics;
        for i in 0..basics.len() {
            for j in (i + 1)..basics.len() {
                if interferes(&basics[i], &basics[j]) {
                    let shared: BTreeSet<Name> = basics[i]
                        .activation
                        .names()
                        .intersection(&basics[j].activation.names())
                        .cloned()
                        .collect();
                    let shared: Vec<String> = shared.into_iter().map(|n| n.to_string()).collect();
                    findings.push(Finding {
                        rule: rules::CONTRACT_INTERFERENCE.to_string(),
                        severity: Severity::Error,
                        subject: op.id.clone(),
                        message: format!(
                            "contracts {i} and {j} of `{}` are both activated by {}",
                            op.id,
                            shared.join(", ")
                        ),
                        witness: Some((i, j)),
                    });
                }
            }
        }
    }
    CheckReport::from_findings(findings)
}

fn typeof_child(arch: &Architecture, child: &ChildRef) -> TypeName {
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

/// Typing rules: controller orders must accept the subscribed value type,
/// disjunctions that widen to the top type are reported, and declared pull
/// parameters must be used by some pull contract.
pub fn check_typing(arch: &Architecture) -> CheckReport {
    let mut findings = Vec::new();

    for ctl in &arch.control_operators {
        for sub in &ctl.subscriptions {
            let value_type = arch
                .context(sub)
                .expect("resolved architecture")
                .value_type
                .clone();
            for order in &ctl.orders {
                let actuator = arch
                    .actuator(&order.actuator)
                    .expect("resolved architecture");
                let action = actuator
                    .actions
                    .iter()
                    .find(|a| a.name == order.action)
                    .expect("resolved architecture");
                if action.param_types.len() != 1 {
                    findings.push(error(
                        rules::ORDER_ARITY_MISMATCH,
                        &ctl.id,
                        format!(
                            "order `{order}` forwards one value but the action takes {} parameters",
                            action.param_types.len()
                        ),
                    ));
                    continue;
                }
                let param = &action.param_types[0];
                let ok = arch.assignable(&value_type, param).unwrap_or(false);
                if !ok {
                    findings.push(error(
                        rules::ORDER_TYPE_MISMATCH,
                        &ctl.id,
                        format!(
                            "order `{order}` takes `{param}` but subscription `{sub}` delivers `{value_type}`"
                        ),
                    ));
                }
            }
        }
    }

    for op in &arch.context_operators {
        for basic in &op.contract.basics {
            if let ActivationCondition::Push { terms } = &basic.activation {
                for term in terms {
                    if term.members.len() > 1 {
                        let mut lub = typeof_child(arch, &term.members[0]);
                        for member in &term.members[1..] {
                            lub = arch
                                .lub(&lub, &typeof_child(arch, member))
                                .unwrap_or_else(|_| TypeName::top());
                        }
                        if lub.is_top() {
                            let members: Vec<String> =
                                term.members.iter().map(|m| m.to_string()).collect();
                            findings.push(warning(
                                rules::DISJUNCTION_WIDENS_TO_TOP,
                                &op.id,
                                format!(
                                    "disjunction ({}) widens to {}",
                                    members.join(" | "),
                                    TypeName::TOP
                                ),
                            ));
                        }
                    }
                }
            }
        }
        if op.pull_params.is_some() && !has_pull_self(op) {
            findings.push(warning(
                rules::UNUSED_PULL_PARAMS,
                &op.id,
                format!(
                    "`{}` declares pull parameters but has no pull-activated contract",
                    op.id
                ),
            ));
        }
    }

    findings.extend(requirement_cycles(arch));
    CheckReport::from_findings(findings)
}

/// Pull requests execute synchronously, so a cycle in the requirement graph
/// can deadlock at runtime; the simulator refuses it dynamically and the
/// checker warns here.
fn requirement_cycles(arch: &Architecture) -> Vec<Finding> {
    let mut findings = Vec::new();
    let ids: Vec<ComponentId> = arch
        .context_operators
        .iter()
        .map(|c| c.id.clone())
        .collect();
    for start in &ids {
        let mut stack = vec![start.clone()];
        let mut visited = BTreeSet::new();
        let mut on_cycle = false;
        while let Some(cur) = stack.pop() {
            let Some(op) = arch.context(&cur) else {
                continue;
            };
            for basic in &op.contract.basics {
                for target in &basic.requirements.targets {
                    if let ChildRef::Operator(next) = target {
                        if next == start {
                            on_cycle = true;
                        } else if visited.insert(next.clone()) {
                            stack.push(next.clone());
                        }
                    }
                }
            }
        }
        if on_cycle {
            findings.push(warning(
                rules::REQUIREMENT_CYCLE,
                start,
                format!("`{start}` can pull itself through a cycle of data requirements"),
            ));
        }
    }
    findings
}

/// All checks together: consistency, determinacy and typing.
pub fn full_check(arch: &Architecture) -> CheckReport {
    CheckReport::merge([
        check_architecture_consistency(arch),
        check_determinacy(arch),
        check_typing(arch),
    ])
}
