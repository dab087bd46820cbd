//! Random well-formed architectures and scenarios for the test suites.
//!
//! Generated architectures always satisfy the parser's structural rules
//! (resolved references, layer shape, declared pull parameters). By default
//! they are also biased to pass the static checks: requirements only target
//! pull-capable children, push children always emit, and activations of one
//! operator stay disjoint.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::model::*;
use crate::sim::{Scenario, Value};

#[derive(Debug, Clone)]
pub struct GenConfig {
    /// Upper bound on total component count (sensors + operators +
    /// controllers + actuators).
    pub max_components: usize,
    /// When false, requirements and activations may reference children that
    /// break consistency, exercising the checker's failure paths.
    pub well_behaved: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_components: 12,
            well_behaved: true,
        }
    }
}

pub fn random_architecture(seed: u64, config: &GenConfig) -> Architecture {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut arch = Architecture::empty(format!("Rand{seed}"));

    let n_types = rng.gen_range(1..=4);
    for i in 0..n_types {
        let supertype = if i > 0 && rng.gen_bool(0.4) {
            Some(TypeName::new(format!("T{}", rng.gen_range(0..i))))
        } else {
            None
        };
        arch.types.push(TypeDecl {
            name: TypeName::new(format!("T{i}")),
            supertype,
        });
    }
    let random_type = |rng: &mut StdRng| TypeName::new(format!("T{}", rng.gen_range(0..n_types)));

    let budget = config.max_components.max(4);
    let n_sensors = rng.gen_range(1..=2.min(budget / 3).max(1));
    let n_contexts = rng.gen_range(1..=(budget / 2).max(1));
    let n_controllers = rng.gen_range(0..=2.min(budget / 4));

    for s in 0..n_sensors {
        let n_sources = rng.gen_range(1..=2);
        let sources = (0..n_sources)
            .map(|i| {
                let n_params = rng.gen_range(0..=2);
                SensorSource {
                    name: format!("src{i}"),
                    value_type: random_type(&mut rng),
                    pull_params: (0..n_params).map(|_| random_type(&mut rng)).collect(),
                }
            })
            .collect();
        arch.sensors.push(Sensor {
            id: ComponentId::new(format!("S{s}")),
            sources,
        });
    }

    for c in 0..n_contexts {
        // Children available to this operator: all sources, plus earlier
        // operators (keeps the requirement graph acyclic).
        let sources: Vec<ChildRef> = arch.source_refs().map(ChildRef::Source).collect();
        let push_children: Vec<ChildRef> = sources
            .iter()
            .cloned()
            .chain(arch.context_operators.iter().filter_map(|op| {
                let emits = op
                    .contract
                    .basics
                    .iter()
                    .any(|b| b.emission != Emission::Never);
                (!config.well_behaved || emits).then(|| ChildRef::Operator(op.id.clone()))
            }))
            .collect();
        let pull_children: Vec<ChildRef> = sources
            .iter()
            .cloned()
            .chain(arch.context_operators.iter().filter_map(|op| {
                let pullable = op.pull_basic().is_some();
                (!config.well_behaved || pullable).then(|| ChildRef::Operator(op.id.clone()))
            }))
            .collect();

        let mut basics = Vec::new();
        let n_basics = if rng.gen_bool(0.25) { 2 } else { 1 };
        // Partition available push children so sibling contracts never
        // interfere; at most one pull activation per operator.
        let mut pool = push_children.clone();
        let mut pull_used = false;
        for b in 0..n_basics {
            let want_pull = !pull_used && (pool.is_empty() || rng.gen_bool(0.3));
            let activation = if want_pull {
                pull_used = true;
                ActivationCondition::PullSelf
            } else if pool.is_empty() {
                if pull_used {
                    break;
                }
                pull_used = true;
                ActivationCondition::PullSelf
            } else {
                let n_terms = rng.gen_range(1..=2.min(pool.len()));
                let mut terms = Vec::new();
                for _ in 0..n_terms {
                    let idx = rng.gen_range(0..pool.len());
                    let first = pool.swap_remove(idx);
                    let mut members = vec![first];
                    // A disjunct may be added only if enough children remain
                    // for the terms still to be built.
                    let still_needed = n_terms - terms.len() - 1;
                    if pool.len() > still_needed && rng.gen_bool(0.2) {
                        let idx = rng.gen_range(0..pool.len());
                        members.push(pool.swap_remove(idx));
                    }
                    terms.push(Disjunction { members });
                }
                ActivationCondition::Push { terms }
            };
            let n_reqs = if pull_children.is_empty() {
                0
            } else {
                rng.gen_range(0..=2.min(pull_children.len()))
            };
            let mut targets = Vec::new();
            for _ in 0..n_reqs {
                let t = pull_children[rng.gen_range(0..pull_children.len())].clone();
                if !targets.contains(&t) {
                    targets.push(t);
                }
            }
            let emission = match (&activation, rng.gen_range(0..3)) {
                (_, 0) => Emission::Always,
                (_, 1) => Emission::Maybe,
                (_, 2) => Emission::Never,
                _ => unreachable!(),
            };
            basics.push(BasicContract {
                activation,
                requirements: DataRequirement::of(targets),
                emission,
            });
            let _ = b;
        }
        let has_pull = basics
            .iter()
            .any(|b| b.activation == ActivationCondition::PullSelf);
        let pull_params = has_pull.then(|| {
            (0..rng.gen_range(0..=2))
                .map(|_| random_type(&mut rng))
                .collect()
        });
        arch.context_operators.push(ContextOperator {
            id: ComponentId::new(format!("C{c}")),
            value_type: random_type(&mut rng),
            pull_params,
            contract: InteractionContract { basics },
        });
    }

    let emitting: Vec<ComponentId> = arch
        .context_operators
        .iter()
        .filter(|op| {
            op.contract
                .basics
                .iter()
                .any(|b| b.emission != Emission::Never)
        })
        .map(|op| op.id.clone())
        .collect();
    for k in 0..n_controllers {
        if emitting.is_empty() {
            break;
        }
        let sub = emitting[rng.gen_range(0..emitting.len())].clone();
        let sub_type = arch.context(&sub).expect("generated").value_type.clone();
        let actuator = ComponentId::new(format!("A{k}"));
        arch.actuators.push(Actuator {
            id: actuator.clone(),
            actions: vec![ActionDecl {
                name: "act".to_string(),
                param_types: vec![sub_type],
            }],
        });
        arch.control_operators.push(ControlOperator {
            id: ComponentId::new(format!("K{k}")),
            subscriptions: vec![sub],
            orders: vec![Order {
                actuator,
                action: "act".to_string(),
            }],
        });
    }

    arch
}

/// A random scenario for an architecture: source stimuli plus pull probes on
/// pull-capable operators.
pub fn random_scenario(seed: u64, arch: &Architecture, max_steps: usize) -> Scenario {
    let mut rng = StdRng::seed_from_u64(seed);
    let sources: Vec<SourceRef> = arch.source_refs().collect();
    let pullable: Vec<&ContextOperator> = arch
        .context_operators
        .iter()
        .filter(|op| op.pull_basic().is_some())
        .collect();
    let mut scenario = Scenario::default();
    if sources.is_empty() {
        return scenario;
    }
    let steps = rng.gen_range(1..=max_steps.max(1));
    for i in 0..steps {
        if !pullable.is_empty() && rng.gen_bool(0.2) {
            let op = pullable[rng.gen_range(0..pullable.len())];
            let args = op
                .pull_args()
                .iter()
                .map(|t| Value::typed(t.clone(), format!("q{i}")))
                .collect();
            scenario = scenario.pull(op.id.as_str(), args);
        } else {
            let src = &sources[rng.gen_range(0..sources.len())];
            let decl = arch.source(src).expect("generated");
            scenario = scenario.publish(
                src.clone(),
                Value::typed(decl.value_type.clone(), format!("v{i}")),
            );
        }
    }
    scenario
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check;

    #[test]
    fn generated_architectures_parse_back() {
        for seed in 0..25 {
            let arch = random_architecture(seed, &GenConfig::default());
            let text = crate::parser::format(&arch);
            let reparsed = crate::parser::parse_str(&text)
                .unwrap_or_else(|e| panic!("seed {seed}: {e:?}\n{text}"));
            assert_eq!(arch, reparsed, "seed {seed}");
        }
    }

    #[test]
    fn generated_architectures_respect_the_layer_shape() {
        use crate::model::{ChildRef, ComponentKind};
        for seed in 0..40 {
            let arch = random_architecture(seed, &GenConfig::default());
            for id in arch.component_ids() {
                let kind = arch.kind_of(id).unwrap();
                for child in arch.children(id).unwrap() {
                    match (kind, &child) {
                        (ComponentKind::Sensor, _) => panic!("sensors have no children"),
                        (ComponentKind::Context, ChildRef::Source(_)) => {}
                        (ComponentKind::Context, ChildRef::Operator(c)) => {
                            assert_eq!(arch.kind_of(c), Some(ComponentKind::Context));
                        }
                        (ComponentKind::Controller, ChildRef::Operator(c)) => {
                            assert_eq!(arch.kind_of(c), Some(ComponentKind::Context));
                        }
                        (ComponentKind::Actuator, ChildRef::Operator(c)) => {
                            assert_eq!(arch.kind_of(c), Some(ComponentKind::Controller));
                        }
                        other => panic!("seed {seed}: edge violates layer shape: {other:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn well_behaved_architectures_pass_checks() {
        let mut passing = 0;
        for seed in 0..50 {
            let arch = random_architecture(seed, &GenConfig::default());
            if check::full_check(&arch).passed() {
                passing += 1;
            }
        }
        assert!(passing >= 40, "only {passing}/50 pass the static checks");
    }
}
