//! Shared helpers for the integration suites: seeded model generators,
//! independent oracles and a minimal DOT well-formedness scanner.
//!
//! Not every test target uses every helper.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;

use metaguard_core::{
    ActionKind, ActionLabel, CompletionPolicy, ComponentCollection, ExecutionTrace, IoAutomaton,
    MetaAutomaton, MetaTransition, StateId, Transition, TransitionName,
};

/// Random automaton over the given alphabet: input-enabled, nonempty starts,
/// unique atomic labels prefixed to stay disjoint across automata.
pub fn random_automaton(
    rng: &mut impl Rng,
    id: &str,
    actions: &[ActionLabel],
    max_states: usize,
    label_prefix: &str,
) -> IoAutomaton {
    let n = rng.random_range(1..=max_states.max(1));
    let states: Vec<StateId> = (0..n).map(|i| StateId::new(format!("q{i}"))).collect();
    let mut transitions = Vec::new();
    let mut label = 0usize;
    let mut fresh = || {
        label += 1;
        TransitionName::atom(format!("{label_prefix}{label}"))
    };
    for act in actions {
        for q in &states {
            let count = match act.kind {
                ActionKind::Input => {
                    if rng.random_bool(0.3) {
                        2
                    } else {
                        1
                    }
                }
                _ => {
                    if rng.random_bool(0.15) {
                        2
                    } else if rng.random_bool(0.6) {
                        1
                    } else {
                        0
                    }
                }
            };
            for _ in 0..count {
                let target = &states[rng.random_range(0..n)];
                transitions.push(Transition::new(
                    fresh(),
                    q.as_str(),
                    act.name.clone(),
                    target.as_str(),
                ));
            }
        }
    }
    let mut starts: Vec<StateId> = states
        .iter()
        .filter(|_| rng.random_bool(0.3))
        .cloned()
        .collect();
    if starts.is_empty() {
        starts.push(states[rng.random_range(0..n)].clone());
    }
    IoAutomaton {
        id: id.into(),
        states,
        actions: actions.to_vec(),
        transitions,
        starts,
    }
}

/// Small automaton with at most `max_states` states and `max_actions`
/// actions, mixing kinds.
pub fn random_subject(rng: &mut impl Rng, max_states: usize, max_actions: usize) -> IoAutomaton {
    let kinds = [ActionKind::Input, ActionKind::Output, ActionKind::Internal];
    let count = rng.random_range(1..=max_actions.max(1));
    let actions: Vec<ActionLabel> = (0..count)
        .map(|i| ActionLabel::new(format!("x{i}"), kinds[rng.random_range(0..kinds.len())]))
        .collect();
    random_automaton(rng, "Subject", &actions, max_states, "t")
}

/// Strongly compatible pair. Shared actions synchronize (outputs of one are
/// inputs of the other); each side may also keep a private internal action.
pub fn random_compatible_pair(rng: &mut impl Rng) -> (IoAutomaton, IoAutomaton) {
    let total = rng.random_range(2..=4usize);
    let mut left_actions = Vec::new();
    let mut right_actions = Vec::new();
    for i in 0..total {
        let name = format!("x{i}");
        match rng.random_range(0..3) {
            0 => {
                left_actions.push(ActionLabel::new(name.clone(), ActionKind::Output));
                right_actions.push(ActionLabel::new(name, ActionKind::Input));
            }
            1 => {
                left_actions.push(ActionLabel::new(name.clone(), ActionKind::Input));
                right_actions.push(ActionLabel::new(name, ActionKind::Output));
            }
            _ => {
                left_actions.push(ActionLabel::new(name.clone(), ActionKind::Input));
                right_actions.push(ActionLabel::new(name, ActionKind::Input));
            }
        }
    }
    if rng.random_bool(0.4) {
        left_actions.push(ActionLabel::new("hL", ActionKind::Internal));
    }
    if rng.random_bool(0.4) {
        right_actions.push(ActionLabel::new("hR", ActionKind::Internal));
    }
    let left = random_automaton(rng, "Left", &left_actions, 3, "tL");
    let right = random_automaton(rng, "Right", &right_actions, 3, "tR");
    (left, right)
}

/// Random constraint over `a`: per (state, label) a few edges, nonempty
/// starts, strict policy, terminal alphabet seeded from the subject.
pub fn random_meta(rng: &mut impl Rng, a: &IoAutomaton, max_states: usize) -> MetaAutomaton {
    let mut m = MetaAutomaton::over("Rule", a);
    let n = rng.random_range(1..=max_states.max(1));
    m.states = (0..n).map(|i| StateId::new(format!("g{i}"))).collect();
    m.starts = vec![m.states[0].clone()];
    for q in m.states.clone() {
        if rng.random_bool(0.2) && !m.starts.contains(&q) {
            m.starts.push(q.clone());
        }
    }
    let labels: Vec<String> = m.terminals.iter().cloned().collect();
    let mut transitions = Vec::new();
    for q in &m.states {
        for label in &labels {
            if rng.random_bool(0.6) {
                let target = &m.states[rng.random_range(0..n)];
                transitions.push(MetaTransition::new(
                    q.clone(),
                    label.clone(),
                    target.clone(),
                ));
                if rng.random_bool(0.15) {
                    let target = &m.states[rng.random_range(0..n)];
                    transitions.push(MetaTransition::new(
                        q.clone(),
                        label.clone(),
                        target.clone(),
                    ));
                }
            }
        }
    }
    m.transitions = transitions;
    m.policy = CompletionPolicy::Strict;
    m
}

/// Brute-force trace enumeration of a component collection, stepping state
/// vectors directly and never building the composed automaton.
pub fn product_traces_oracle(cs: &ComponentCollection, bound: usize) -> BTreeSet<ExecutionTrace> {
    let comps = cs.components();
    let mut actions: BTreeSet<&str> = BTreeSet::new();
    for c in comps {
        actions.extend(c.actions.iter().map(|a| a.name.as_str()));
    }

    let mut start_vectors: BTreeSet<Vec<&StateId>> = BTreeSet::new();
    let mut acc: Vec<Vec<&StateId>> = vec![Vec::new()];
    for c in comps {
        let mut next = Vec::new();
        for prefix in &acc {
            for s in &c.starts {
                let mut row = prefix.clone();
                row.push(s);
                next.push(row);
            }
        }
        acc = next;
    }
    start_vectors.extend(acc);

    fn vector_steps<'a>(
        comps: &'a [IoAutomaton],
        v: &[&'a StateId],
        action: &str,
    ) -> Option<BTreeSet<Vec<&'a StateId>>> {
        let mut targets: Vec<Vec<&StateId>> = vec![Vec::new()];
        let mut participated = false;
        for (j, c) in comps.iter().enumerate() {
            if c.has_action(action) {
                participated = true;
                let moves: Vec<&StateId> = c
                    .transitions
                    .iter()
                    .filter(|t| t.source == *v[j] && t.action == action)
                    .map(|t| &t.target)
                    .collect();
                if moves.is_empty() {
                    return None;
                }
                let mut next = Vec::new();
                for prefix in &targets {
                    for m in &moves {
                        let mut row = prefix.clone();
                        row.push(*m);
                        next.push(row);
                    }
                }
                targets = next;
            } else {
                for row in &mut targets {
                    row.push(v[j]);
                }
            }
        }
        if participated {
            Some(targets.into_iter().collect())
        } else {
            None
        }
    }

    let mut out: BTreeSet<ExecutionTrace> = BTreeSet::new();
    out.insert(ExecutionTrace::empty());
    let mut level: Vec<(ExecutionTrace, BTreeSet<Vec<&StateId>>)> =
        vec![(ExecutionTrace::empty(), start_vectors)];
    for _ in 0..bound {
        let mut next_level = Vec::new();
        for (trace, vectors) in &level {
            for action in &actions {
                let mut successors: BTreeSet<Vec<&StateId>> = BTreeSet::new();
                for v in vectors {
                    if let Some(moves) = vector_steps(comps, v, action) {
                        successors.extend(moves);
                    }
                }
                if successors.is_empty() {
                    continue;
                }
                let mut extended = trace.clone();
                extended.push(*action);
                if out.insert(extended.clone()) {
                    next_level.push((extended, successors));
                }
            }
        }
        if next_level.is_empty() {
            break;
        }
        level = next_level;
    }
    out
}

/// Minimal DOT well-formedness check: one digraph, balanced braces, every
/// label attribute quoted, quotes balanced.
pub fn assert_dot_well_formed(dot: &str) {
    assert!(dot.starts_with("digraph "), "missing digraph header");
    assert!(dot.ends_with("}\n"), "missing closing brace");
    let mut depth = 0i64;
    let mut in_quote = false;
    let mut escaped = false;
    for c in dot.chars() {
        if in_quote {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_quote = false;
            }
            continue;
        }
        match c {
            '"' => in_quote = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                assert!(depth >= 0, "unbalanced braces");
            }
            _ => {}
        }
    }
    assert!(!in_quote, "unterminated quote");
    assert_eq!(depth, 0, "unbalanced braces");
    for line in dot.lines() {
        if let Some(idx) = line.find("label=") {
            let rest = &line[idx + "label=".len()..];
            assert!(rest.starts_with('"'), "unquoted label in line: {line}");
        }
    }
}

/// True when some pair of consecutive actions equals (x, x).
pub fn has_immediate_repeat(trace: &ExecutionTrace, action: &str) -> bool {
    trace
        .actions()
        .windows(2)
        .any(|w| w[0] == action && w[1] == action)
}
