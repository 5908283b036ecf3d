//! Bounded trace-language analysis: membership at the action level and at
//! the transition-name level, the composition soundness check, language
//! inclusion with shortest counterexamples, and hazard diagnosis.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::automaton::{reachable, IoAutomaton, StateId, TransitionName};
use crate::error::{Error, Result};
use crate::meta::{meta_compose, MetaAutomaton};

/// Enumeration refuses bounds above this unless the caller raises the cap.
pub const DEFAULT_BOUND_CAP: usize = 12;

/// Finite sequence of action names.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExecutionTrace {
    actions: Vec<String>,
}

impl ExecutionTrace {
    pub fn new<I, S>(actions: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ExecutionTrace {
            actions: actions.into_iter().map(Into::into).collect(),
        }
    }

    pub fn empty() -> Self {
        ExecutionTrace::default()
    }

    /// Whitespace-separated action names; empty input is the empty trace.
    pub fn parse(text: &str) -> Self {
        ExecutionTrace::new(text.split_whitespace())
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn push(&mut self, action: impl Into<String>) {
        self.actions.push(action.into());
    }
}

impl fmt::Display for ExecutionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.actions.join(" "))
    }
}

/// Finite sequence of transition-name steps.
///
/// Each step is a name set; for component automata every step is a
/// singleton, for products it is the set of labels that fired together.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct TransitionTrace {
    steps: Vec<TransitionName>,
}

impl TransitionTrace {
    pub fn new(steps: Vec<TransitionName>) -> Self {
        TransitionTrace { steps }
    }

    /// Trace of singleton steps from atomic labels.
    pub fn atoms<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TransitionTrace {
            steps: labels.into_iter().map(TransitionName::atom).collect(),
        }
    }

    /// Whitespace-separated atomic labels.
    pub fn parse(text: &str) -> Self {
        TransitionTrace::atoms(text.split_whitespace())
    }

    pub fn steps(&self) -> &[TransitionName] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl fmt::Display for TransitionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.steps.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// One disagreement between the synthesized product and the run-level check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem1Counterexample {
    pub trace: ExecutionTrace,
    pub in_composed: bool,
    pub has_accepted_run: bool,
}

/// Outcome of the bounded composition-soundness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem1Report {
    pub bound: usize,
    pub traces_checked: usize,
    pub counterexamples: Vec<Theorem1Counterexample>,
}

impl Theorem1Report {
    pub fn ok(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Outcome of a bounded language-inclusion check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InclusionOutcome {
    pub included: bool,
    /// Shortest trace of the sub-language missing from the super-language,
    /// ties broken lexicographically.
    pub counterexample: Option<ExecutionTrace>,
}

fn start_set(a: &IoAutomaton) -> BTreeSet<&StateId> {
    a.starts.iter().collect()
}

fn advance<'a>(
    a: &'a IoAutomaton,
    current: &BTreeSet<&'a StateId>,
    action: &str,
) -> BTreeSet<&'a StateId> {
    a.transitions
        .iter()
        .filter(|t| t.action == action && current.contains(&t.source))
        .map(|t| &t.target)
        .collect()
}

/// True iff some run from a start state consumes the whole trace.
pub fn accepts_execution(a: &IoAutomaton, t: &ExecutionTrace) -> Result<bool> {
    for action in t.actions() {
        if !a.has_action(action) {
            return Err(Error::UnknownAction(action.clone()));
        }
    }
    let mut current = start_set(a);
    for action in t.actions() {
        current = advance(a, &current, action);
        if current.is_empty() {
            return Ok(false);
        }
    }
    Ok(!current.is_empty())
}

/// All transition traces of runs of `a` on `t`. Empty set iff `t` is not a
/// trace of `a`; the empty execution has exactly the empty run.
pub fn runs_of(a: &IoAutomaton, t: &ExecutionTrace) -> Result<BTreeSet<TransitionTrace>> {
    for action in t.actions() {
        if !a.has_action(action) {
            return Err(Error::UnknownAction(action.clone()));
        }
    }
    let mut partial: Vec<(&StateId, Vec<TransitionName>)> = Vec::new();
    let mut seen_start = BTreeSet::new();
    for s in &a.starts {
        if seen_start.insert(s) {
            partial.push((s, Vec::new()));
        }
    }
    for action in t.actions() {
        let mut next = Vec::new();
        for (q, run) in &partial {
            for tr in &a.transitions {
                if tr.source == **q && tr.action == *action {
                    let mut extended = run.clone();
                    extended.push(tr.name.clone());
                    next.push((&tr.target, extended));
                }
            }
        }
        partial = next;
        if partial.is_empty() {
            return Ok(BTreeSet::new());
        }
    }
    Ok(partial
        .into_iter()
        .map(|(_, run)| TransitionTrace::new(run))
        .collect())
}

/// True iff some run of the constraint consumes the trace, where a name-set
/// step is consumed by any edge labeled with one of its members.
pub fn accepts_transition_trace(m: &MetaAutomaton, t: &TransitionTrace) -> Result<bool> {
    for step in t.steps() {
        for label in step.labels() {
            if !m.terminals.contains(label) {
                return Err(Error::UnknownTerminal(label.to_string()));
            }
        }
    }
    let mut current: BTreeSet<&StateId> = m.starts.iter().collect();
    for step in t.steps() {
        current = m
            .transitions
            .iter()
            .filter(|e| step.contains(&e.label) && current.contains(&e.source))
            .map(|e| &e.target)
            .collect();
        if current.is_empty() {
            return Ok(false);
        }
    }
    Ok(!current.is_empty())
}

/// Exhaustively compares, up to `bound`, membership in the meta-composition
/// against "some run of the subject has an accepted transition trace".
pub fn check_theorem1(a: &IoAutomaton, m: &MetaAutomaton, bound: usize) -> Result<Theorem1Report> {
    let composed = meta_compose(a, m)?.automaton;
    // Widen the terminal alphabet so run traces of `a` always resolve.
    let mut m = m.clone();
    m.terminals
        .extend(a.atomic_labels().into_iter().map(str::to_string));

    let traces = enumerate_traces_capped(a, bound, usize::MAX)?;
    let mut counterexamples = Vec::new();
    let traces_checked = traces.len();
    for t in traces {
        let in_composed = accepts_execution(&composed, &t)?;
        let has_accepted_run = runs_of(a, &t)?
            .iter()
            .map(|run| accepts_transition_trace(&m, run))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .any(|ok| ok);
        if in_composed != has_accepted_run {
            counterexamples.push(Theorem1Counterexample {
                trace: t,
                in_composed,
                has_accepted_run,
            });
        }
    }
    Ok(Theorem1Report {
        bound,
        traces_checked,
        counterexamples,
    })
}

/// Bounded language inclusion with a shortest counterexample on failure.
///
/// Breadth-first over pairs of state sets, expanding actions in
/// lexicographic order, so the first counterexample found is the shortest
/// and lexicographically least among the shortest.
pub fn check_language_inclusion(
    sub: &IoAutomaton,
    sup: &IoAutomaton,
    bound: usize,
) -> InclusionOutcome {
    let mut actions: Vec<&str> = sub
        .transitions
        .iter()
        .map(|t| t.action.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    actions.sort_unstable();

    let start = (start_set(sub), start_set(sup));
    if start.0.is_empty() {
        // Sub has no traces at all, not even the empty one.
        return InclusionOutcome {
            included: true,
            counterexample: None,
        };
    }
    if start.1.is_empty() {
        return InclusionOutcome {
            included: false,
            counterexample: Some(ExecutionTrace::empty()),
        };
    }

    let mut visited: BTreeSet<(BTreeSet<&StateId>, BTreeSet<&StateId>)> = BTreeSet::new();
    visited.insert(start.clone());
    let mut queue: VecDeque<(BTreeSet<&StateId>, BTreeSet<&StateId>, ExecutionTrace)> =
        VecDeque::from([(start.0, start.1, ExecutionTrace::empty())]);

    while let Some((sub_states, sup_states, trace)) = queue.pop_front() {
        if trace.len() >= bound {
            continue;
        }
        for action in &actions {
            let next_sub = advance(sub, &sub_states, action);
            if next_sub.is_empty() {
                continue;
            }
            let mut next_trace = trace.clone();
            next_trace.push(*action);
            let next_sup = if sup.has_action(action) {
                advance(sup, &sup_states, action)
            } else {
                BTreeSet::new()
            };
            if next_sup.is_empty() {
                return InclusionOutcome {
                    included: false,
                    counterexample: Some(next_trace),
                };
            }
            let pair = (next_sub, next_sup);
            if visited.insert(pair.clone()) {
                queue.push_back((pair.0, pair.1, next_trace));
            }
        }
    }
    InclusionOutcome {
        included: true,
        counterexample: None,
    }
}

/// Atomic labels that survive in no reachable transition of the
/// meta-composition: the transitions the constraint eliminated.
pub fn diagnose_hazards(a: &IoAutomaton, m: &MetaAutomaton) -> Result<BTreeSet<String>> {
    let composed = meta_compose(a, m)?.automaton;
    let (_, pruned) = reachable(a);
    let surviving = composed.atomic_labels();
    Ok(pruned
        .atomic_labels()
        .into_iter()
        .filter(|l| !surviving.contains(l))
        .map(str::to_string)
        .collect())
}

/// Exactly the traces of length at most `bound`; prefix-closed by
/// construction. Uses [`DEFAULT_BOUND_CAP`].
pub fn enumerate_traces(a: &IoAutomaton, bound: usize) -> Result<BTreeSet<ExecutionTrace>> {
    enumerate_traces_capped(a, bound, DEFAULT_BOUND_CAP)
}

/// Enumeration with an explicit safety cap.
pub fn enumerate_traces_capped(
    a: &IoAutomaton,
    bound: usize,
    cap: usize,
) -> Result<BTreeSet<ExecutionTrace>> {
    if bound > cap {
        return Err(Error::BoundTooLarge { bound, cap });
    }
    let mut out = BTreeSet::new();
    if a.starts.is_empty() {
        return Ok(out);
    }
    let mut level: BTreeMap<ExecutionTrace, BTreeSet<&StateId>> =
        BTreeMap::from([(ExecutionTrace::empty(), start_set(a))]);
    out.insert(ExecutionTrace::empty());
    for _ in 0..bound {
        let mut next: BTreeMap<ExecutionTrace, BTreeSet<&StateId>> = BTreeMap::new();
        for (trace, states) in &level {
            let enabled: BTreeSet<&str> = a
                .transitions
                .iter()
                .filter(|t| states.contains(&t.source))
                .map(|t| t.action.as_str())
                .collect();
            for action in enabled {
                let successors = advance(a, states, action);
                if successors.is_empty() {
                    continue;
                }
                let mut extended = trace.clone();
                extended.push(action);
                next.insert(extended, successors);
            }
        }
        if next.is_empty() {
            break;
        }
        out.extend(next.keys().cloned());
        level = next;
    }
    Ok(out)
}
