//! Canonical pretty-printer. `parse(format(a))` is structurally equal to `a`
//! for every well-formed architecture.

use std::fmt::Write;

use crate::model::{
    ActivationCondition, Architecture, BasicContract, ChildRef, Emission, TypeName,
};

pub fn format(arch: &Architecture) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "architecture {};", arch.name);

    if !arch.types.is_empty() {
        let _ = writeln!(w);
        for t in &arch.types {
            match &t.supertype {
                Some(sup) => {
                    let _ = writeln!(w, "type {} extends {};", t.name, sup);
                }
                None => {
                    let _ = writeln!(w, "type {};", t.name);
                }
            }
        }
    }

    for s in &arch.sensors {
        let _ = writeln!(w);
        let _ = writeln!(w, "sensor {} {{", s.id);
        for src in &s.sources {
            let _ = write!(w, "  source {} : {}", src.name, src.value_type);
            if !src.pull_params.is_empty() {
                let _ = write!(w, " pulled with ({})", type_list(&src.pull_params));
            }
            let _ = writeln!(w, ";");
        }
        let _ = writeln!(w, "}}");
    }

    for c in &arch.context_operators {
        let _ = writeln!(w);
        let _ = write!(w, "context {} : {}", c.id, c.value_type);
        if let Some(params) = &c.pull_params {
            let _ = write!(w, " pulled with ({})", type_list(params));
        }
        let _ = writeln!(w, " {{");
        for b in &c.contract.basics {
            let _ = writeln!(w, "  contract {};", format_basic(b));
        }
        let _ = writeln!(w, "}}");
    }

    for ctl in &arch.control_operators {
        let _ = writeln!(w);
        let _ = writeln!(w, "controller {} {{", ctl.id);
        // Subscriptions trigger every order, so the canonical rendering is
        // the full cross product; re-parsing collapses it back losslessly.
        for sub in &ctl.subscriptions {
            for order in &ctl.orders {
                let _ = writeln!(w, "  on push({sub}) do {order};");
            }
        }
        let _ = writeln!(w, "}}");
    }

    for a in &arch.actuators {
        let _ = writeln!(w);
        let _ = writeln!(w, "actuator {} {{", a.id);
        for action in &a.actions {
            let _ = writeln!(
                w,
                "  action {}({});",
                action.name,
                type_list(&action.param_types)
            );
        }
        let _ = writeln!(w, "}}");
    }

    out
}

fn type_list(types: &[TypeName]) -> String {
    types
        .iter()
        .map(|t| t.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

fn child(c: &ChildRef) -> String {
    c.to_string()
}

/// One basic contract in the canonical keyword surface, without the leading
/// `contract` and trailing `;`.
pub fn format_basic(b: &BasicContract) -> String {
    let mut out = String::new();
    match &b.activation {
        ActivationCondition::Push { terms } => {
            let rendered: Vec<String> = terms
                .iter()
                .map(|t| t.members.iter().map(child).collect::<Vec<_>>().join(" | "))
                .collect();
            out.push_str(&format!("on push({})", rendered.join(", ")));
        }
        ActivationCondition::PullSelf => out.push_str("on pull"),
    }
    if !b.requirements.targets.is_empty() {
        let reqs: Vec<String> = b.requirements.targets.iter().map(child).collect();
        out.push_str(&format!(" get({})", reqs.join(", ")));
    }
    out.push_str(match b.emission {
        Emission::Always => " always publish",
        Emission::Maybe => " maybe publish",
        Emission::Never => " no publish",
    });
    out
}
