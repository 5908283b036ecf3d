//! Input/output automata: states, a partitioned action alphabet and named
//! transitions, plus validation, stepping and reachability.
//!
//! An automaton is input-enabled: every input action must have a transition
//! from every state. Transition names are nonempty sets of atomic labels; a
//! hand-written component uses singleton names, a synchronous product carries
//! the set of participating component labels.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Whether an action is received, emitted or internal to the automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionKind {
    Input,
    Output,
    Internal,
}

impl ActionKind {
    /// Suffix used in diagrams: `?` input, `!` output, `;` internal.
    pub fn suffix(self) -> char {
        match self {
            ActionKind::Input => '?',
            ActionKind::Output => '!',
            ActionKind::Internal => ';',
        }
    }
}

/// A named action together with its kind.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionLabel {
    pub name: String,
    pub kind: ActionKind,
}

impl ActionLabel {
    pub fn new(name: impl Into<String>, kind: ActionKind) -> Self {
        ActionLabel {
            name: name.into(),
            kind,
        }
    }
}

/// Name of a state, unique within one automaton.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(String);

impl StateId {
    pub fn new(name: impl Into<String>) -> Self {
        StateId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for StateId {
    fn from(s: &str) -> Self {
        StateId::new(s)
    }
}

/// Nonempty set of atomic labels naming one transition.
///
/// Singleton for component automata; a product transition unions the labels
/// of the component transitions that synchronized.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionName {
    labels: BTreeSet<String>,
}

impl TransitionName {
    /// Singleton name.
    pub fn atom(label: impl Into<String>) -> Self {
        let mut labels = BTreeSet::new();
        labels.insert(label.into());
        TransitionName { labels }
    }

    /// Name from a nonempty label set. Panics on an empty iterator; callers
    /// own the nonemptiness invariant.
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: BTreeSet<String> = labels.into_iter().map(Into::into).collect();
        assert!(!labels.is_empty(), "transition name must be nonempty");
        TransitionName { labels }
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.contains(label)
    }

    pub fn is_singleton(&self) -> bool {
        self.labels.len() == 1
    }

    /// Union of this name with another, for synchronized transitions.
    pub fn union(&self, other: &TransitionName) -> TransitionName {
        TransitionName {
            labels: self.labels.union(&other.labels).cloned().collect(),
        }
    }
}

impl fmt::Display for TransitionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_singleton() {
            f.write_str(self.labels.iter().next().unwrap())
        } else {
            let joined: Vec<&str> = self.labels.iter().map(String::as_str).collect();
            write!(f, "{{{}}}", joined.join(","))
        }
    }
}

/// One labeled transition. `action` refers to an [`ActionLabel`] by name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub name: TransitionName,
    pub source: StateId,
    pub action: String,
    pub target: StateId,
}

impl Transition {
    pub fn new(
        name: TransitionName,
        source: impl Into<StateId>,
        action: impl Into<String>,
        target: impl Into<StateId>,
    ) -> Self {
        Transition {
            name,
            source: source.into(),
            action: action.into(),
            target: target.into(),
        }
    }
}

impl From<String> for StateId {
    fn from(s: String) -> Self {
        StateId(s)
    }
}

/// An input/output automaton.
///
/// Declaration order of `states` and `actions` is preserved so that models
/// serialize the way they were written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IoAutomaton {
    pub id: String,
    pub states: Vec<StateId>,
    pub actions: Vec<ActionLabel>,
    pub transitions: Vec<Transition>,
    pub starts: Vec<StateId>,
}

impl IoAutomaton {
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn action(&self, name: &str) -> Option<&ActionLabel> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn action_kind(&self, name: &str) -> Option<ActionKind> {
        self.action(name).map(|a| a.kind)
    }

    pub fn actions_of_kind(&self, kind: ActionKind) -> impl Iterator<Item = &ActionLabel> {
        self.actions.iter().filter(move |a| a.kind == kind)
    }

    pub fn has_state(&self, state: &StateId) -> bool {
        self.states.contains(state)
    }

    /// Every atomic label occurring in some transition name.
    pub fn atomic_labels(&self) -> BTreeSet<&str> {
        self.transitions
            .iter()
            .flat_map(|t| t.name.labels())
            .collect()
    }

    /// True when the action name occurs in the alphabet.
    pub fn has_action(&self, name: &str) -> bool {
        self.action(name).is_some()
    }
}

/// Severity of a validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

/// Machine-readable code attached to each validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FindingCode {
    EmptyStartSet,
    DanglingStateRef,
    DanglingActionRef,
    DuplicateState,
    DuplicateAction,
    DuplicateTransitionLabel,
    InputNotEnabled,
    StateCollision,
    UnknownTerminal,
    UnconstrainedLabel,
    InputEnablednessLost,
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FindingCode::EmptyStartSet => "EMPTY_START_SET",
            FindingCode::DanglingStateRef => "DANGLING_STATE_REF",
            FindingCode::DanglingActionRef => "DANGLING_ACTION_REF",
            FindingCode::DuplicateState => "DUPLICATE_STATE",
            FindingCode::DuplicateAction => "DUPLICATE_ACTION",
            FindingCode::DuplicateTransitionLabel => "DUPLICATE_TRANSITION_LABEL",
            FindingCode::InputNotEnabled => "INPUT_NOT_ENABLED",
            FindingCode::StateCollision => "STATE_COLLISION",
            FindingCode::UnknownTerminal => "UNKNOWN_TERMINAL",
            FindingCode::UnconstrainedLabel => "UNCONSTRAINED_LABEL",
            FindingCode::InputEnablednessLost => "INPUT_ENABLEDNESS_LOST",
        };
        f.write_str(s)
    }
}

/// The model element a finding points at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    State(StateId),
    Action(String),
    Label(String),
    StateAction(StateId, String),
    Transition(TransitionName),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::State(q) => write!(f, "state `{q}`"),
            Witness::Action(a) => write!(f, "action `{a}`"),
            Witness::Label(l) => write!(f, "label `{l}`"),
            Witness::StateAction(q, a) => write!(f, "({q}, {a})"),
            Witness::Transition(n) => write!(f, "transition `{n}`"),
        }
    }
}

/// One validation finding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub severity: Severity,
    pub code: FindingCode,
    pub message: String,
    pub witness: Option<Witness>,
}

impl Finding {
    pub fn error(code: FindingCode, message: impl Into<String>, witness: Option<Witness>) -> Self {
        Finding {
            severity: Severity::Error,
            code,
            message: message.into(),
            witness,
        }
    }

    pub fn warning(
        code: FindingCode,
        message: impl Into<String>,
        witness: Option<Witness>,
    ) -> Self {
        Finding {
            severity: Severity::Warning,
            code,
            message: message.into(),
            witness,
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}] {}", self.severity, self.code, self.message)?;
        if let Some(w) = &self.witness {
            write!(f, " ({w})")?;
        }
        Ok(())
    }
}

/// Outcome of validating an automaton or a constraint.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    /// True iff the report contains no error-severity finding.
    pub fn ok(&self) -> bool {
        !self.findings.iter().any(|f| f.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Warning)
    }

    pub fn has_code(&self, code: FindingCode) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.findings.is_empty() {
            return f.write_str("ok");
        }
        for (i, finding) in self.findings.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{finding}")?;
        }
        Ok(())
    }
}

/// (state, input action) pairs with no outgoing transition.
pub(crate) fn input_gaps(a: &IoAutomaton) -> Vec<(StateId, String)> {
    let mut gaps = Vec::new();
    for action in a.actions_of_kind(ActionKind::Input) {
        for q in &a.states {
            let enabled = a
                .transitions
                .iter()
                .any(|t| t.source == *q && t.action == action.name);
            if !enabled {
                gaps.push((q.clone(), action.name.clone()));
            }
        }
    }
    gaps
}

/// Checks an automaton against its defining clauses and reports every
/// violation; problems are findings, never failures.
///
/// Duplicated atomic labels are an error when one of the offending names is a
/// singleton (a hand-written duplicate); sharing between multi-label names is
/// reported as a warning, since a synchronous product legitimately reuses a
/// component label across synchronization sets.
pub fn validate(a: &IoAutomaton) -> ValidationReport {
    let mut findings = Vec::new();

    let mut seen_states = BTreeSet::new();
    for q in &a.states {
        if !seen_states.insert(q.clone()) {
            findings.push(Finding::error(
                FindingCode::DuplicateState,
                format!("state `{q}` declared more than once"),
                Some(Witness::State(q.clone())),
            ));
        }
    }

    let mut seen_actions = BTreeSet::new();
    for act in &a.actions {
        if !seen_actions.insert(act.name.clone()) {
            findings.push(Finding::error(
                FindingCode::DuplicateAction,
                format!("action `{}` declared more than once", act.name),
                Some(Witness::Action(act.name.clone())),
            ));
        }
    }

    if a.starts.is_empty() {
        findings.push(Finding::error(
            FindingCode::EmptyStartSet,
            "start state set is empty",
            None,
        ));
    }

    let states: BTreeSet<&StateId> = a.states.iter().collect();
    for s in &a.starts {
        if !states.contains(s) {
            findings.push(Finding::error(
                FindingCode::DanglingStateRef,
                format!("start state `{s}` is not a declared state"),
                Some(Witness::State(s.clone())),
            ));
        }
    }

    for t in &a.transitions {
        if !states.contains(&t.source) {
            findings.push(Finding::error(
                FindingCode::DanglingStateRef,
                format!(
                    "transition `{}` leaves undeclared state `{}`",
                    t.name, t.source
                ),
                Some(Witness::Transition(t.name.clone())),
            ));
        }
        if !states.contains(&t.target) {
            findings.push(Finding::error(
                FindingCode::DanglingStateRef,
                format!(
                    "transition `{}` enters undeclared state `{}`",
                    t.name, t.target
                ),
                Some(Witness::Transition(t.name.clone())),
            ));
        }
        if !seen_actions.contains(&t.action) {
            findings.push(Finding::error(
                FindingCode::DanglingActionRef,
                format!(
                    "transition `{}` uses undeclared action `{}`",
                    t.name, t.action
                ),
                Some(Witness::Transition(t.name.clone())),
            ));
        }
    }

    let mut label_uses: BTreeMap<&str, Vec<&TransitionName>> = BTreeMap::new();
    for t in &a.transitions {
        for label in t.name.labels() {
            label_uses.entry(label).or_default().push(&t.name);
        }
    }
    for (label, names) in label_uses {
        if names.len() > 1 {
            let severity = if names.iter().any(|n| n.is_singleton()) {
                Severity::Error
            } else {
                Severity::Warning
            };
            findings.push(Finding {
                severity,
                code: FindingCode::DuplicateTransitionLabel,
                message: format!(
                    "atomic label `{label}` appears in {} transition names",
                    names.len()
                ),
                witness: Some(Witness::Label(label.to_string())),
            });
        }
    }

    for (q, action) in input_gaps(a) {
        findings.push(Finding::error(
            FindingCode::InputNotEnabled,
            format!("no transition for input `{action}` from state `{q}`"),
            Some(Witness::StateAction(q, action)),
        ));
    }

    ValidationReport { findings }
}

/// All moves from `q` on `action`: the set of (transition name, successor).
pub fn step(
    a: &IoAutomaton,
    q: &StateId,
    action: &str,
) -> Result<BTreeSet<(TransitionName, StateId)>> {
    if !a.has_state(q) {
        return Err(Error::UnknownState(q.to_string()));
    }
    if !a.has_action(action) {
        return Err(Error::UnknownAction(action.to_string()));
    }
    Ok(a.transitions
        .iter()
        .filter(|t| t.source == *q && t.action == action)
        .map(|t| (t.name.clone(), t.target.clone()))
        .collect())
}

/// Least set of states containing the starts and closed under transitions,
/// together with the automaton pruned to that set.
///
/// Pruning keeps the full alphabet and never changes the trace language.
pub fn reachable(a: &IoAutomaton) -> (BTreeSet<StateId>, IoAutomaton) {
    let mut seen: BTreeSet<StateId> = BTreeSet::new();
    let mut queue: VecDeque<StateId> = VecDeque::new();
    for s in &a.starts {
        if seen.insert(s.clone()) {
            queue.push_back(s.clone());
        }
    }
    let mut outgoing: BTreeMap<&StateId, Vec<&Transition>> = BTreeMap::new();
    for t in &a.transitions {
        outgoing.entry(&t.source).or_default().push(t);
    }
    while let Some(q) = queue.pop_front() {
        if let Some(ts) = outgoing.get(&q) {
            for t in ts {
                if seen.insert(t.target.clone()) {
                    queue.push_back(t.target.clone());
                }
            }
        }
    }

    let pruned = IoAutomaton {
        id: a.id.clone(),
        states: a
            .states
            .iter()
            .filter(|q| seen.contains(q))
            .cloned()
            .collect(),
        actions: a.actions.clone(),
        transitions: a
            .transitions
            .iter()
            .filter(|t| seen.contains(&t.source) && seen.contains(&t.target))
            .cloned()
            .collect(),
        starts: a.starts.clone(),
    };
    (seen, pruned)
}
