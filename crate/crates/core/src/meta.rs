//! Safety constraints as automata over transition names, and the
//! meta-composition that synthesizes the constrained system.
//!
//! A constraint automaton runs one level above its subject: its alphabet is
//! the subject's atomic transition labels, so it accepts or refuses sequences
//! of transitions rather than sequences of actions. Meta-composition keeps a
//! subject transition only while the constraint has a matching edge; for a
//! composite transition it is enough that one member of its name set is
//! authorized.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::automaton::{
    input_gaps, validate, Finding, FindingCode, IoAutomaton, StateId, Transition, ValidationReport,
    Witness,
};
use crate::composition::CompositeState;
use crate::error::{Error, Result};

/// How labels the constraint never mentions are treated.
///
/// `Strict` reads the constraint literally: a label with no outgoing edge at
/// the current constraint state is blocked. `ImplicitAllow` treats labels the
/// constraint never mentions anywhere as unconstrained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CompletionPolicy {
    #[default]
    Strict,
    ImplicitAllow,
}

impl fmt::Display for CompletionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompletionPolicy::Strict => f.write_str("strict"),
            CompletionPolicy::ImplicitAllow => f.write_str("implicit-allow"),
        }
    }
}

impl FromStr for CompletionPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "strict" => Ok(CompletionPolicy::Strict),
            "implicit-allow" => Ok(CompletionPolicy::ImplicitAllow),
            other => Err(format!("unknown policy `{other}`")),
        }
    }
}

/// Edge of a constraint automaton, labeled by one atomic transition label of
/// the subject.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MetaTransition {
    pub source: StateId,
    pub label: String,
    pub target: StateId,
}

impl MetaTransition {
    pub fn new(
        source: impl Into<StateId>,
        label: impl Into<String>,
        target: impl Into<StateId>,
    ) -> Self {
        MetaTransition {
            source: source.into(),
            label: label.into(),
            target: target.into(),
        }
    }
}

/// Constraint automaton over the transition names of a subject automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaAutomaton {
    pub id: String,
    /// Identifier of the subject automaton.
    pub subject: String,
    pub states: Vec<StateId>,
    /// Terminal alphabet: the subject's atomic transition labels.
    pub terminals: BTreeSet<String>,
    pub transitions: Vec<MetaTransition>,
    pub starts: Vec<StateId>,
    pub policy: CompletionPolicy,
}

impl MetaAutomaton {
    /// Empty constraint over `subject`, with the terminal alphabet seeded
    /// from the subject's transitions.
    pub fn over(id: impl Into<String>, subject: &IoAutomaton) -> Self {
        MetaAutomaton {
            id: id.into(),
            subject: subject.id.clone(),
            states: Vec::new(),
            terminals: subject
                .atomic_labels()
                .into_iter()
                .map(str::to_string)
                .collect(),
            transitions: Vec::new(),
            starts: Vec::new(),
            policy: CompletionPolicy::Strict,
        }
    }

    /// One-state constraint that authorizes every label of the subject.
    pub fn universal(id: impl Into<String>, subject: &IoAutomaton) -> Self {
        let mut m = Self::over(id, subject);
        let hub = StateId::new("u0");
        m.states.push(hub.clone());
        m.starts.push(hub.clone());
        m.transitions = m
            .terminals
            .iter()
            .map(|label| MetaTransition::new(hub.clone(), label.clone(), hub.clone()))
            .collect();
        m
    }

    /// Labels that occur on some edge of this constraint.
    pub fn mentioned_labels(&self) -> BTreeSet<&str> {
        self.transitions.iter().map(|t| t.label.as_str()).collect()
    }

    pub fn has_state(&self, q: &StateId) -> bool {
        self.states.contains(q)
    }
}

/// Checks a constraint against its subject.
///
/// Returns `SubjectMismatch` when the constraint is not declared over `a` at
/// all; every other problem is a report finding. Subject labels the
/// constraint never mentions are warnings: under strict semantics they are
/// universally blocked.
pub fn validate_meta(m: &MetaAutomaton, a: &IoAutomaton) -> Result<ValidationReport> {
    if m.subject != a.id {
        return Err(Error::SubjectMismatch {
            constraint: m.id.clone(),
            expected: m.subject.clone(),
            actual: a.id.clone(),
        });
    }
    let mut findings = Vec::new();

    for q in &m.states {
        if a.has_state(q) {
            findings.push(Finding::error(
                FindingCode::StateCollision,
                format!("constraint state `{q}` collides with a subject state"),
                Some(Witness::State(q.clone())),
            ));
        }
    }

    let subject_labels: BTreeSet<&str> = a.atomic_labels();
    for terminal in &m.terminals {
        if !subject_labels.contains(terminal.as_str()) {
            findings.push(Finding::error(
                FindingCode::UnknownTerminal,
                format!("terminal `{terminal}` names no transition of `{}`", a.id),
                Some(Witness::Label(terminal.clone())),
            ));
        }
    }

    if m.starts.is_empty() {
        findings.push(Finding::error(
            FindingCode::EmptyStartSet,
            "constraint start state set is empty",
            None,
        ));
    }
    for s in &m.starts {
        if !m.has_state(s) {
            findings.push(Finding::error(
                FindingCode::DanglingStateRef,
                format!("start state `{s}` is not a declared constraint state"),
                Some(Witness::State(s.clone())),
            ));
        }
    }

    for t in &m.transitions {
        if !m.has_state(&t.source) {
            findings.push(Finding::error(
                FindingCode::DanglingStateRef,
                format!(
                    "edge on `{}` leaves undeclared state `{}`",
                    t.label, t.source
                ),
                Some(Witness::State(t.source.clone())),
            ));
        }
        if !m.has_state(&t.target) {
            findings.push(Finding::error(
                FindingCode::DanglingStateRef,
                format!(
                    "edge on `{}` enters undeclared state `{}`",
                    t.label, t.target
                ),
                Some(Witness::State(t.target.clone())),
            ));
        }
        if !subject_labels.contains(t.label.as_str()) {
            findings.push(Finding::error(
                FindingCode::UnknownTerminal,
                format!("edge label `{}` names no transition of `{}`", t.label, a.id),
                Some(Witness::Label(t.label.clone())),
            ));
        }
    }

    let mentioned = m.mentioned_labels();
    for label in &subject_labels {
        if !mentioned.contains(label) {
            findings.push(Finding::warning(
                FindingCode::UnconstrainedLabel,
                format!("label `{label}` never appears in the constraint; strict semantics blocks it everywhere"),
                Some(Witness::Label(label.to_string())),
            ));
        }
    }

    Ok(ValidationReport { findings })
}

/// Applies a completion policy to a constraint.
///
/// Under `Strict` the constraint is returned unchanged. Under
/// `ImplicitAllow`, every subject label with no outgoing edge anywhere in the
/// constraint gets a self-loop at every constraint state. Deterministic and
/// idempotent.
pub fn complete_meta(
    m: &MetaAutomaton,
    a: &IoAutomaton,
    policy: CompletionPolicy,
) -> MetaAutomaton {
    let mut out = m.clone();
    out.terminals
        .extend(a.atomic_labels().into_iter().map(str::to_string));
    if policy == CompletionPolicy::Strict {
        return out;
    }
    let mentioned: BTreeSet<String> = m.mentioned_labels().iter().map(|s| s.to_string()).collect();
    let unmentioned: Vec<&str> = a
        .atomic_labels()
        .into_iter()
        .filter(|l| !mentioned.contains(*l))
        .collect();
    for q in &m.states {
        for label in &unmentioned {
            out.transitions
                .push(MetaTransition::new(q.clone(), *label, q.clone()));
        }
    }
    out
}

/// Result of a meta-composition: the synthesized automaton plus warnings,
/// currently only the input-enabledness the constraint may have destroyed.
#[derive(Debug, Clone)]
pub struct MetaComposition {
    pub automaton: IoAutomaton,
    pub report: ValidationReport,
    /// For each surviving transition, the sub-labels of its name the
    /// constraint authorized it through. Singleton names are authorized by
    /// their own label; a composite may be let through by several members.
    pub authorizations: BTreeMap<Transition, BTreeSet<String>>,
}

/// Product of a subject automaton and a constraint.
///
/// States are subject-state, constraint-state pairs reachable from the start
/// pairs; the action alphabet is the subject's, unchanged. A subject
/// transition named `I` survives at constraint state `q̂` once per edge
/// `(q̂, k, q̂')` with `k ∈ I`. Blocking an input action is permitted and
/// reported as a warning, not an error.
pub fn meta_compose(a: &IoAutomaton, m: &MetaAutomaton) -> Result<MetaComposition> {
    let report = validate(a);
    // Label reuse does not break the product semantics (authorization is per
    // arc, by name membership), so a product used as subject stays eligible.
    let blocking = report
        .errors()
        .any(|f| f.code != FindingCode::DuplicateTransitionLabel);
    if blocking {
        return Err(Error::ValidationFailed {
            id: a.id.clone(),
            report,
        });
    }
    let report = validate_meta(m, a)?;
    if !report.ok() {
        return Err(Error::ValidationFailed {
            id: m.id.clone(),
            report,
        });
    }

    let mut meta_edges: BTreeMap<&StateId, Vec<&MetaTransition>> = BTreeMap::new();
    for t in &m.transitions {
        meta_edges.entry(&t.source).or_default().push(t);
    }
    let mut subject_edges: BTreeMap<&StateId, Vec<&Transition>> = BTreeMap::new();
    for t in &a.transitions {
        subject_edges.entry(&t.source).or_default().push(t);
    }

    let mut start_pairs: Vec<CompositeState> = Vec::new();
    for q in &a.starts {
        for qh in &m.starts {
            let pair = CompositeState::new(vec![q.clone(), qh.clone()]);
            if !start_pairs.contains(&pair) {
                start_pairs.push(pair);
            }
        }
    }

    let mut names = PairNames::default();
    let mut state_order: Vec<CompositeState> = Vec::new();
    let mut known: BTreeSet<CompositeState> = BTreeSet::new();
    let mut queue: VecDeque<CompositeState> = VecDeque::new();
    for pair in &start_pairs {
        if known.insert(pair.clone()) {
            names.assign(pair);
            state_order.push(pair.clone());
            queue.push_back(pair.clone());
        }
    }

    let mut transitions: Vec<Transition> = Vec::new();
    let mut emitted: BTreeSet<Transition> = BTreeSet::new();
    let mut authorizations: BTreeMap<Transition, BTreeSet<String>> = BTreeMap::new();
    while let Some(pair) = queue.pop_front() {
        let (q, qh) = (&pair.parts()[0], &pair.parts()[1]);
        let subject_moves = subject_edges.get(q).map(Vec::as_slice).unwrap_or(&[]);
        let meta_moves = meta_edges.get(qh).map(Vec::as_slice).unwrap_or(&[]);
        for t in subject_moves {
            for e in meta_moves {
                if !t.name.contains(&e.label) {
                    continue;
                }
                let next = CompositeState::new(vec![t.target.clone(), e.target.clone()]);
                if known.insert(next.clone()) {
                    names.assign(&next);
                    state_order.push(next.clone());
                    queue.push_back(next.clone());
                }
                let transition = Transition {
                    name: t.name.clone(),
                    source: names.get(&pair),
                    action: t.action.clone(),
                    target: names.get(&next),
                };
                authorizations
                    .entry(transition.clone())
                    .or_default()
                    .insert(e.label.clone());
                if emitted.insert(transition.clone()) {
                    transitions.push(transition);
                }
            }
        }
    }

    let automaton = IoAutomaton {
        id: format!("{}.{}", a.id, m.id),
        states: state_order.iter().map(|p| names.get(p)).collect(),
        actions: a.actions.clone(),
        transitions,
        starts: start_pairs.iter().map(|p| names.get(p)).collect(),
    };

    let mut findings = Vec::new();
    for (q, action) in input_gaps(&automaton) {
        findings.push(Finding::warning(
            FindingCode::InputEnablednessLost,
            format!("constraint blocks input `{action}` at state `{q}`"),
            Some(Witness::StateAction(q, action)),
        ));
    }
    Ok(MetaComposition {
        automaton,
        report: ValidationReport { findings },
        authorizations,
    })
}

#[derive(Default)]
struct PairNames {
    by_pair: BTreeMap<CompositeState, StateId>,
    taken: BTreeSet<String>,
}

impl PairNames {
    fn assign(&mut self, pair: &CompositeState) {
        if self.by_pair.contains_key(pair) {
            return;
        }
        let base = pair.name();
        let mut candidate = base.clone();
        let mut k = 1;
        while !self.taken.insert(candidate.clone()) {
            k += 1;
            candidate = format!("{base}_{k}");
        }
        self.by_pair.insert(pair.clone(), StateId::new(candidate));
    }

    fn get(&self, pair: &CompositeState) -> StateId {
        self.by_pair
            .get(pair)
            .expect("pair named before use")
            .clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{ActionKind, ActionLabel, TransitionName};
    use crate::fixtures;
    use crate::trace::enumerate_traces;

    #[test]
    fn reactor_constraint_validates_clean() {
        let a = fixtures::reactor();
        let m = fixtures::reactor_constraint();
        let report = validate_meta(&m, &a).unwrap();
        assert!(report.ok(), "{report}");
        // p4 is deliberately never authorized, which is worth a warning.
        let warnings: Vec<_> = report.warnings().collect();
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].code, FindingCode::UnconstrainedLabel);
        assert_eq!(warnings[0].witness, Some(Witness::Label("p4".into())));
    }

    #[test]
    fn unknown_terminal_and_state_collision_are_errors() {
        let a = fixtures::reactor();
        let mut m = fixtures::reactor_constraint();
        m.transitions.push(MetaTransition::new("s0", "p99", "s0"));
        let report = validate_meta(&m, &a).unwrap();
        assert!(report.has_code(FindingCode::UnknownTerminal));
        assert!(!report.ok());

        let mut m = fixtures::reactor_constraint();
        m.states.push("q0".into());
        let report = validate_meta(&m, &a).unwrap();
        assert!(report.has_code(FindingCode::StateCollision));
    }

    #[test]
    fn subject_mismatch_is_a_hard_error() {
        let m = fixtures::reactor_constraint();
        let other = fixtures::candy_machine();
        assert!(matches!(
            validate_meta(&m, &other),
            Err(Error::SubjectMismatch { .. })
        ));
    }

    #[test]
    fn strict_completion_is_identity() {
        let a = fixtures::reactor();
        let m = fixtures::reactor_constraint();
        let completed = complete_meta(&m, &a, CompletionPolicy::Strict);
        assert_eq!(completed.transitions, m.transitions);
        assert_eq!(completed.states, m.states);
    }

    #[test]
    fn implicit_allow_adds_self_loops_for_unmentioned_labels() {
        let a = fixtures::reactor();
        // Minimal constraint mentioning only p1 and p2.
        let mut m = MetaAutomaton::over("Minimal", &a);
        m.states = vec!["s0".into(), "s1".into()];
        m.starts = vec!["s0".into()];
        m.transitions = vec![
            MetaTransition::new("s0", "p1", "s1"),
            MetaTransition::new("s1", "p2", "s0"),
        ];
        let completed = complete_meta(&m, &a, CompletionPolicy::ImplicitAllow);
        for label in ["p3", "p4", "p5", "p6", "p7", "p8"] {
            for state in ["s0", "s1"] {
                assert!(
                    completed
                        .transitions
                        .contains(&MetaTransition::new(state, label, state)),
                    "missing self-loop on {label} at {state}"
                );
            }
        }
        // Mentioned labels gain no new edges.
        assert_eq!(
            completed.transitions.len(),
            m.transitions.len() + 6 * m.states.len()
        );
        // Completion removes every unconstrained-label warning.
        let report = validate_meta(&completed, &a).unwrap();
        assert_eq!(report.warnings().count(), 0);
        // Idempotent.
        let twice = complete_meta(&completed, &a, CompletionPolicy::ImplicitAllow);
        assert_eq!(twice, completed);
    }

    #[test]
    fn reactor_meta_composition_eliminates_the_hazard_label() {
        let a = fixtures::reactor();
        let m = fixtures::reactor_constraint();
        let composed = meta_compose(&a, &m).unwrap();
        let labels = composed.automaton.atomic_labels();
        assert!(!labels.contains("p4"));
        for label in ["p1", "p2", "p3", "p5", "p6", "p7", "p8"] {
            assert!(labels.contains(label), "label {label} should survive");
        }
        // The pair (q1, s0) is never reachable: q1 is only entered via p1,
        // which forces the constraint into s1.
        assert!(!composed.automaton.states.contains(&StateId::from("q1.s0")));
    }

    #[test]
    fn blocking_an_input_is_a_warning_with_witnesses() {
        let a = fixtures::reactor();
        let m = fixtures::reactor_constraint();
        let composed = meta_compose(&a, &m).unwrap();
        let warning = composed
            .report
            .warnings()
            .find(|f| f.code == FindingCode::InputEnablednessLost)
            .expect("blocked input warning");
        assert_eq!(
            warning.witness,
            Some(Witness::StateAction("q1.s1".into(), "l".into()))
        );
    }

    #[test]
    fn meta_composition_keeps_the_subject_alphabet() {
        let a = fixtures::reactor();
        let m = fixtures::reactor_constraint();
        let composed = meta_compose(&a, &m).unwrap();
        assert_eq!(composed.automaton.actions, a.actions);
    }

    #[test]
    fn universal_constraint_is_a_right_identity_up_to_reachability() {
        let a = fixtures::reactor();
        let u = MetaAutomaton::universal("Any", &a);
        let composed = meta_compose(&a, &u).unwrap();
        let (_, pruned) = crate::automaton::reachable(&a);
        assert_eq!(
            enumerate_traces(&composed.automaton, 6).unwrap(),
            enumerate_traces(&pruned, 6).unwrap()
        );
    }

    /// Direct product oracle for the singleton-name case: pair states, keep
    /// a transition iff the constraint has an edge on exactly its label.
    fn singleton_product_oracle(a: &IoAutomaton, m: &MetaAutomaton) -> BTreeSet<Transition> {
        let mut out = BTreeSet::new();
        for t in &a.transitions {
            let label = t.name.labels().next().unwrap();
            assert!(t.name.is_singleton());
            for e in &m.transitions {
                if e.label == label {
                    out.insert(Transition {
                        name: t.name.clone(),
                        source: StateId::new(format!("{}.{}", t.source, e.source)),
                        action: t.action.clone(),
                        target: StateId::new(format!("{}.{}", t.target, e.target)),
                    });
                }
            }
        }
        out
    }

    #[test]
    fn singleton_rule_agrees_with_the_direct_product() {
        let a = fixtures::reactor();
        let m = fixtures::reactor_constraint();
        let composed = meta_compose(&a, &m).unwrap();
        let oracle = singleton_product_oracle(&a, &m);
        // Every synthesized transition appears in the unrestricted product.
        for t in &composed.automaton.transitions {
            assert!(oracle.contains(t), "not in oracle: {t:?}");
        }
        // Conversely, every oracle transition between reachable pairs of the
        // synthesized system is present.
        let states: BTreeSet<&StateId> = composed.automaton.states.iter().collect();
        for t in &oracle {
            if states.contains(&t.source) {
                assert!(
                    composed.automaton.transitions.contains(t),
                    "missing from product: {t:?}"
                );
            }
        }
    }

    #[test]
    fn every_surviving_transition_records_its_authorizing_labels() {
        let a = fixtures::reactor();
        let m = fixtures::reactor_constraint();
        let composed = meta_compose(&a, &m).unwrap();
        assert_eq!(
            composed.authorizations.len(),
            composed.automaton.transitions.len()
        );
        for (t, labels) in &composed.authorizations {
            // Singleton names are authorized through their own label.
            let own: BTreeSet<String> = t.name.labels().map(str::to_string).collect();
            assert_eq!(labels, &own, "transition {}", t.name);
        }

        // A composite press is let through by both of its member labels,
        // since the constraint mentions the machine and the user side.
        let sys = fixtures::candy_system();
        let rule = complete_meta(
            &fixtures::candy_constraint(),
            &sys,
            CompletionPolicy::ImplicitAllow,
        );
        let composed = meta_compose(&sys, &rule).unwrap();
        let (press, labels) = composed
            .authorizations
            .iter()
            .find(|(t, _)| t.name == TransitionName::new(["p3", "p9"]))
            .expect("first press survives");
        assert_eq!(press.action, "b1");
        assert_eq!(
            labels,
            &BTreeSet::from(["p3".to_string(), "p9".to_string()])
        );
    }

    #[test]
    fn meta_compose_rejects_invalid_subjects() {
        let a = IoAutomaton {
            id: "Broken".into(),
            states: vec!["q0".into()],
            actions: vec![ActionLabel::new("l", ActionKind::Input)],
            transitions: vec![],
            starts: vec!["q0".into()],
        };
        let m = MetaAutomaton::universal("Any", &a);
        assert!(matches!(
            meta_compose(&a, &m),
            Err(Error::ValidationFailed { .. })
        ));
    }

    #[test]
    fn nondeterministic_constraints_produce_all_satisfying_pairs() {
        let a = fixtures::reactor();
        let mut m = MetaAutomaton::over("Fork", &a);
        m.states = vec!["s0".into(), "s1".into(), "s2".into()];
        m.starts = vec!["s0".into()];
        // Two edges on p1 out of s0: both product transitions must exist.
        m.transitions = vec![
            MetaTransition::new("s0", "p1", "s1"),
            MetaTransition::new("s0", "p1", "s2"),
        ];
        let composed = meta_compose(&a, &m).unwrap();
        let p1_targets: BTreeSet<&StateId> = composed
            .automaton
            .transitions
            .iter()
            .filter(|t| t.name == TransitionName::atom("p1"))
            .map(|t| &t.target)
            .collect();
        assert_eq!(p1_targets.len(), 2);
    }
}
