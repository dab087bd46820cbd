//! Bounded explicit-state search over the flow model, deciding response
//! (`always p leadsto q`) and absence (`never p`) invariants.
//!
//! States are (process locations, channel occupancies) pairs; transitions
//! carry the interaction event of the step taken. A response invariant fails
//! when some reachable trigger edge starts a goal-free path that ends in a
//! state where only the environment could move (sensors may stall, so such a
//! state is a legitimate end of behavior) or enters a goal-free cycle that is
//! weakly fair for all component processes.

use std::collections::{HashMap, VecDeque};

use super::flow::{FlowModel, Guard};
use super::invariant::{Invariant, Predicate};
use crate::sim::Event;

#[derive(Debug, Clone)]
pub struct CheckerConfig {
    /// Maximum number of states to expand before reporting a bounded verdict.
    pub state_limit: usize,
    /// Capacity of every channel in the flow model.
    pub channel_capacity: u8,
}

impl Default for CheckerConfig {
    fn default() -> Self {
        CheckerConfig {
            state_limit: 1_000_000,
            channel_capacity: 1,
        }
    }
}

/// Outcome of one invariant check. A counterexample is present exactly when
/// the invariant does not hold.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub holds: bool,
    pub counterexample: Option<Vec<Event>>,
    pub states_explored: usize,
    /// True when the state limit truncated the search; a holding verdict is
    /// then only valid within the bound.
    pub bounded: bool,
    pub bound: usize,
    /// The fairness assumption under which the verdict was computed.
    pub assumptions: &'static str,
}

pub const FAIRNESS_NOTE: &str =
    "weak fairness assumed for component processes; sensor processes may stall";

const MAX_PROCESSES: usize = 64;

#[derive(Clone, Copy)]
struct Edge {
    to: u32,
    process: u16,
    event: Option<u32>,
}

struct Graph {
    states: usize,
    edges: Vec<Vec<Edge>>,
    enabled: Vec<u64>,
    expanded: Vec<bool>,
    parent: Vec<Option<(u32, Edge)>>,
    events: Vec<Event>,
    fair_mask: u64,
    truncated: bool,
}

/// Breadth-first exploration of the model up to `limit` expanded states.
fn explore(model: &FlowModel, limit: usize) -> Graph {
    assert!(
        model.processes.len() <= MAX_PROCESSES,
        "flow model has more than {MAX_PROCESSES} processes"
    );
    let n_procs = model.processes.len();
    let n_chans = model.channels.len();

    // Event pool, one entry per distinct branch event.
    let mut events = Vec::new();
    let mut branch_events: Vec<Vec<Vec<Option<u32>>>> = Vec::with_capacity(n_procs);
    for proc in &model.processes {
        let mut per_loc = Vec::with_capacity(proc.locations.len());
        for loc in &proc.locations {
            let mut per_branch = Vec::with_capacity(loc.len());
            for branch in loc {
                per_branch.push(branch.event.as_ref().map(|e| {
                    let id = events.len() as u32;
                    events.push(e.clone());
                    id
                }));
            }
            per_loc.push(per_branch);
        }
        branch_events.push(per_loc);
    }

    let fair_mask = model
        .processes
        .iter()
        .enumerate()
        .filter(|(_, p)| p.fair)
        .fold(0u64, |m, (i, _)| m | (1 << i));

    let initial: Vec<u8> = vec![0; n_procs + n_chans];
    let mut index: HashMap<Vec<u8>, u32> = HashMap::new();
    index.insert(initial.clone(), 0);
    let mut store: Vec<Vec<u8>> = vec![initial];
    let mut edges: Vec<Vec<Edge>> = vec![Vec::new()];
    let mut enabled: Vec<u64> = vec![0];
    let mut expanded: Vec<bool> = vec![false];
    let mut parent: Vec<Option<(u32, Edge)>> = vec![None];

    let mut queue: VecDeque<u32> = VecDeque::new();
    queue.push_back(0);
    let mut n_expanded = 0usize;
    let mut truncated = false;

    while let Some(id) = queue.pop_front() {
        if n_expanded >= limit {
            truncated = true;
            break;
        }
        n_expanded += 1;
        expanded[id as usize] = true;
        let state = store[id as usize].clone();
        let (locs, chans) = state.split_at(n_procs);
        let mut enabled_mask = 0u64;
        let mut outgoing = Vec::new();

        for (p, proc) in model.processes.iter().enumerate() {
            let loc = locs[p] as usize;
            for (bi, branch) in proc.locations[loc].iter().enumerate() {
                let mut new_chans = chans.to_vec();
                let ok = match &branch.guard {
                    Guard::Tau => true,
                    Guard::RecvAll(chs) => chs.iter().all(|&c| {
                        if new_chans[c] > 0 {
                            new_chans[c] -= 1;
                            true
                        } else {
                            false
                        }
                    }),
                    Guard::SendAll(chs) => chs.iter().all(|&c| {
                        if new_chans[c] < model.channels[c].capacity {
                            new_chans[c] += 1;
                            true
                        } else {
                            false
                        }
                    }),
                };
                if !ok {
                    continue;
                }
                enabled_mask |= 1 << p;
                let mut next = Vec::with_capacity(state.len());
                next.extend_from_slice(locs);
                next[p] = branch.next as u8;
                next.extend_from_slice(&new_chans);

                let to = match index.get(&next) {
                    Some(&to) => to,
                    None => {
                        let to = store.len() as u32;
                        index.insert(next.clone(), to);
                        store.push(next);
                        edges.push(Vec::new());
                        enabled.push(0);
                        expanded.push(false);
                        parent.push(None);
                        queue.push_back(to);
                        to
                    }
                };
                let edge = Edge {
                    to,
                    process: p as u16,
                    event: branch_events[p][loc][bi],
                };
                if parent[to as usize].is_none() && to != 0 {
                    parent[to as usize] = Some((id, edge));
                }
                outgoing.push(edge);
            }
        }
        enabled[id as usize] = enabled_mask;
        edges[id as usize] = outgoing;
    }

    Graph {
        states: store.len(),
        edges,
        enabled,
        expanded,
        parent,
        events,
        fair_mask,
        truncated,
    }
}

impl Graph {
    fn event_of(&self, e: &Edge) -> Option<&Event> {
        e.event.map(|i| &self.events[i as usize])
    }

    fn matches(&self, e: &Edge, pred: &Predicate) -> bool {
        self.event_of(e).is_some_and(|ev| pred.matches_event(ev))
    }

    /// Path of events from the initial state to `state` along BFS parents.
    fn path_to(&self, state: u32) -> Vec<(u32, Edge)> {
        let mut rev = Vec::new();
        let mut cur = state;
        while let Some((prev, edge)) = self.parent[cur as usize] {
            rev.push((prev, edge));
            cur = prev;
        }
        rev.reverse();
        rev
    }
}

/// Check one invariant on a built flow model.
pub fn check_on_model(model: &FlowModel, invariant: &Invariant, config: &CheckerConfig) -> Verdict {
    let graph = explore(model, config.state_limit);
    let (holds, counterexample) = match invariant {
        Invariant::Never(pred) => check_never(&graph, pred),
        Invariant::Response { trigger, goal } => check_response(&graph, trigger, goal),
    };
    Verdict {
        holds,
        counterexample,
        states_explored: graph.states,
        bounded: graph.truncated,
        bound: config.state_limit,
        assumptions: FAIRNESS_NOTE,
    }
}

fn check_never(graph: &Graph, pred: &Predicate) -> (bool, Option<Vec<Event>>) {
    for s in 0..graph.states {
        if !graph.expanded[s] {
            continue;
        }
        for edge in &graph.edges[s] {
            if graph.matches(edge, pred) {
                let mut events: Vec<Event> = graph
                    .path_to(s as u32)
                    .iter()
                    .filter_map(|(_, e)| graph.event_of(e).cloned())
                    .collect();
                events.extend(graph.event_of(edge).cloned());
                return (false, Some(events));
            }
        }
    }
    (true, None)
}

fn check_response(
    graph: &Graph,
    trigger: &Predicate,
    goal: &Predicate,
) -> (bool, Option<Vec<Event>>) {
    let n = graph.states;

    // Goal-free subgraph, over expanded states only.
    let goal_free = |s: usize, e: &Edge| -> bool { graph.expanded[s] && !graph.matches(e, goal) };

    // Core states: ends of behavior that can absorb a goal-free execution.
    #[derive(Clone, Copy, PartialEq)]
    enum Core {
        No,
        EnvTerminal,
        FairCycle,
    }
    let mut core = vec![Core::No; n];
    for (s, slot) in core.iter_mut().enumerate() {
        if graph.expanded[s] && graph.enabled[s] & graph.fair_mask == 0 {
            *slot = Core::EnvTerminal;
        }
    }
    let mut membership = vec![false; n];
    for scc in goal_free_sccs(graph, &goal_free) {
        for &s in &scc {
            membership[s as usize] = true;
        }
        let mut internal_edge = false;
        let mut fired = 0u64;
        let mut somewhere_disabled = 0u64;
        for &s in &scc {
            for e in &graph.edges[s as usize] {
                if goal_free(s as usize, e) && membership[e.to as usize] {
                    internal_edge = true;
                    fired |= 1 << e.process;
                }
            }
            somewhere_disabled |= !graph.enabled[s as usize];
        }
        for &s in &scc {
            membership[s as usize] = false;
        }
        if !internal_edge {
            continue;
        }
        // Weak fairness for every component process: it either takes part in
        // the cycle or is disabled somewhere along it.
        if graph.fair_mask & !(fired | somewhere_disabled) == 0 {
            for &s in &scc {
                if core[s as usize] == Core::No {
                    core[s as usize] = Core::FairCycle;
                }
            }
        }
    }

    // Backwards reachability to a core along goal-free edges, remembering one
    // forward step toward the core for counterexample construction.
    let mut toward_core: Vec<Option<Edge>> = vec![None; n];
    let mut in_viol = vec![false; n];
    let mut rev: Vec<Vec<(u32, Edge)>> = vec![Vec::new(); n];
    for s in 0..n {
        for e in &graph.edges[s] {
            if goal_free(s, e) {
                rev[e.to as usize].push((s as u32, *e));
            }
        }
    }
    let mut queue: VecDeque<u32> = VecDeque::new();
    for s in 0..n {
        if core[s] != Core::No {
            in_viol[s] = true;
            queue.push_back(s as u32);
        }
    }
    while let Some(s) = queue.pop_front() {
        for &(prev, edge) in &rev[s as usize] {
            if !in_viol[prev as usize] {
                in_viol[prev as usize] = true;
                toward_core[prev as usize] = Some(edge);
                queue.push_back(prev);
            }
        }
    }

    // A violation needs a reachable trigger edge (not itself satisfying the
    // goal) whose target admits a goal-free path into a core.
    for s in 0..n {
        if !graph.expanded[s] {
            continue;
        }
        for edge in &graph.edges[s] {
            if !graph.matches(edge, trigger) || graph.matches(edge, goal) {
                continue;
            }
            if !in_viol[edge.to as usize] {
                continue;
            }
            let mut events: Vec<Event> = graph
                .path_to(s as u32)
                .iter()
                .filter_map(|(_, e)| graph.event_of(e).cloned())
                .collect();
            events.extend(graph.event_of(edge).cloned());
            let mut cur = edge.to;
            while let Some(step) = toward_core[cur as usize] {
                events.extend(graph.event_of(&step).cloned());
                cur = step.to;
            }
            if core[cur as usize] == Core::FairCycle {
                events.extend(cycle_events(graph, cur, &goal_free));
            }
            return (false, Some(events));
        }
    }
    (true, None)
}

/// One goal-free cycle from `start` back to itself, for counterexample
/// rendering. Exists whenever `start` lies in a fair goal-free SCC.
fn cycle_events(graph: &Graph, start: u32, goal_free: &dyn Fn(usize, &Edge) -> bool) -> Vec<Event> {
    let mut parent: HashMap<u32, (u32, Edge)> = HashMap::new();
    let mut queue = VecDeque::new();
    queue.push_back(start);
    while let Some(s) = queue.pop_front() {
        for e in &graph.edges[s as usize] {
            if !goal_free(s as usize, e) {
                continue;
            }
            if e.to == start {
                let mut rev = vec![(s, *e)];
                let mut cur = s;
                while cur != start {
                    let (prev, edge) = parent[&cur];
                    rev.push((prev, edge));
                    cur = prev;
                }
                rev.reverse();
                return rev
                    .into_iter()
                    .filter_map(|(_, e)| graph.event_of(&e).cloned())
                    .collect();
            }
            if let std::collections::hash_map::Entry::Vacant(slot) = parent.entry(e.to) {
                slot.insert((s, *e));
                queue.push_back(e.to);
            }
        }
    }
    Vec::new()
}

/// Strongly connected components of the goal-free subgraph (iterative
/// Tarjan), restricted to expanded states. Only components of size > 1 or
/// with a self-loop are returned.
fn goal_free_sccs(graph: &Graph, goal_free: &dyn Fn(usize, &Edge) -> bool) -> Vec<Vec<u32>> {
    let n = graph.states;
    let mut index = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut next_index = 0u32;
    let mut sccs = Vec::new();

    enum Phase {
        Enter(u32),
        Resume(u32, usize),
    }

    for root in 0..n {
        if index[root] != u32::MAX || !graph.expanded[root] {
            continue;
        }
        let mut work = vec![Phase::Enter(root as u32)];
        while let Some(phase) = work.pop() {
            match phase {
                Phase::Enter(v) => {
                    index[v as usize] = next_index;
                    low[v as usize] = next_index;
                    next_index += 1;
                    stack.push(v);
                    on_stack[v as usize] = true;
                    work.push(Phase::Resume(v, 0));
                }
                Phase::Resume(v, mut i) => {
                    let mut descended = false;
                    while i < graph.edges[v as usize].len() {
                        let e = graph.edges[v as usize][i];
                        i += 1;
                        if !goal_free(v as usize, &e) || !graph.expanded[e.to as usize] {
                            continue;
                        }
                        let w = e.to;
                        if index[w as usize] == u32::MAX {
                            work.push(Phase::Resume(v, i));
                            work.push(Phase::Enter(w));
                            descended = true;
                            break;
                        } else if on_stack[w as usize] {
                            low[v as usize] = low[v as usize].min(index[w as usize]);
                        }
                    }
                    if descended {
                        continue;
                    }
                    if low[v as usize] == index[v as usize] {
                        let mut scc = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack nonempty");
                            on_stack[w as usize] = false;
                            scc.push(w);
                            if w == v {
                                break;
                            }
                        }
                        let keep = scc.len() > 1
                            || graph.edges[scc[0] as usize]
                                .iter()
                                .any(|e| e.to == scc[0] && goal_free(scc[0] as usize, e));
                        if keep {
                            sccs.push(scc);
                        }
                    }
                    if let Some(Phase::Resume(parent, _)) = work.last() {
                        let p = *parent as usize;
                        low[p] = low[p].min(low[v as usize]);
                    }
                }
            }
        }
    }
    sccs
}
