//! Parallel composition of strongly compatible I/O automata.
//!
//! Components synchronize on shared actions: every component that knows the
//! action moves, everyone else stays put. A composite transition is named by
//! the union of the participating transitions' atomic labels, so `{p1,p15}`
//! records that `p1` and `p15` fired together.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::automaton::{
    validate, ActionKind, ActionLabel, IoAutomaton, StateId, Transition, TransitionName,
};
use crate::error::{Error, Result};

/// Finite ordered collection of components, indexed by ascending naturals.
#[derive(Debug, Clone)]
pub struct ComponentCollection {
    components: Vec<IoAutomaton>,
    indices: Vec<u64>,
}

impl ComponentCollection {
    /// Collection indexed 1..=k in the given order.
    pub fn new(components: Vec<IoAutomaton>) -> Result<Self> {
        let indices = (1..=components.len() as u64).collect();
        Self::with_indices_inner(components, indices)
    }

    /// Collection with explicit indices, which must be strictly ascending.
    pub fn with_indices(pairs: Vec<(u64, IoAutomaton)>) -> Result<Self> {
        let (indices, components) = pairs.into_iter().unzip();
        Self::with_indices_inner(components, indices)
    }

    fn with_indices_inner(components: Vec<IoAutomaton>, indices: Vec<u64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidCollection("collection is empty".into()));
        }
        if !indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidCollection(
                "indices must be strictly ascending".into(),
            ));
        }
        let mut ids = BTreeSet::new();
        for c in &components {
            if !ids.insert(c.id.as_str()) {
                return Err(Error::InvalidCollection(format!(
                    "duplicate component id `{}`",
                    c.id
                )));
            }
        }
        Ok(ComponentCollection {
            components,
            indices,
        })
    }

    pub fn components(&self) -> &[IoAutomaton] {
        &self.components
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Ordered vector of component states, one per component in index order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CompositeState {
    parts: Vec<StateId>,
}

impl CompositeState {
    pub fn new(parts: Vec<StateId>) -> Self {
        CompositeState { parts }
    }

    pub fn parts(&self) -> &[StateId] {
        &self.parts
    }

    /// The j-th component of the vector, 1-based.
    pub fn project(&self, j: usize) -> Result<&StateId> {
        if j == 0 || j > self.parts.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.parts.len(),
            });
        }
        Ok(&self.parts[j - 1])
    }

    /// Rendered name: plain concatenation when every part is a single
    /// character, dot-joined otherwise. A single part keeps its own name.
    pub fn name(&self) -> String {
        if self.parts.len() == 1 {
            return self.parts[0].to_string();
        }
        if self.parts.iter().all(|p| p.as_str().chars().count() == 1) {
            self.parts.iter().map(StateId::as_str).collect()
        } else {
            self.parts
                .iter()
                .map(StateId::as_str)
                .collect::<Vec<_>>()
                .join(".")
        }
    }
}

/// Which strong-compatibility clause a violation falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompatibilityClause {
    OutputOverlap,
    InternalLeak,
}

impl fmt::Display for CompatibilityClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompatibilityClause::OutputOverlap => f.write_str("OUTPUT_OVERLAP"),
            CompatibilityClause::InternalLeak => f.write_str("INTERNAL_LEAK"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibilityViolation {
    pub clause: CompatibilityClause,
    pub action: String,
    /// Indices of the offending component pair.
    pub components: (u64, u64),
}

impl fmt::Display for CompatibilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} on `{}` between components {} and {}",
            self.clause, self.action, self.components.0, self.components.1
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompatibilityReport {
    pub violations: Vec<CompatibilityViolation>,
}

impl CompatibilityReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for CompatibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("strongly compatible");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Pairwise check: no two components share an output action, and no internal
/// action of one component is visible to another.
pub fn check_strong_compatibility(cs: &ComponentCollection) -> CompatibilityReport {
    let mut violations = Vec::new();
    let comps = cs.components();
    for i in 0..comps.len() {
        for j in 0..comps.len() {
            if i == j {
                continue;
            }
            let (a, b) = (&comps[i], &comps[j]);
            if i < j {
                for act in a.actions_of_kind(ActionKind::Output) {
                    if b.actions_of_kind(ActionKind::Output)
                        .any(|o| o.name == act.name)
                    {
                        violations.push(CompatibilityViolation {
                            clause: CompatibilityClause::OutputOverlap,
                            action: act.name.clone(),
                            components: (cs.indices[i], cs.indices[j]),
                        });
                    }
                }
            }
            for act in a.actions_of_kind(ActionKind::Internal) {
                if b.has_action(&act.name) {
                    violations.push(CompatibilityViolation {
                        clause: CompatibilityClause::InternalLeak,
                        action: act.name.clone(),
                        components: (cs.indices[i], cs.indices[j]),
                    });
                }
            }
        }
    }
    CompatibilityReport { violations }
}

/// Composition, restricted to the part reachable from the start vectors.
pub fn compose(cs: &ComponentCollection) -> Result<IoAutomaton> {
    build(cs, false)
}

/// Composition over the full Cartesian state space.
pub fn compose_full(cs: &ComponentCollection) -> Result<IoAutomaton> {
    build(cs, true)
}

struct ProductContext<'a> {
    comps: &'a [IoAutomaton],
    actions: Vec<ActionLabel>,
    /// Per action, which components have it in their alphabet.
    participants: BTreeMap<String, Vec<usize>>,
}

fn composite_alphabet(comps: &[IoAutomaton]) -> Vec<ActionLabel> {
    let mut outputs = BTreeSet::new();
    let mut internals = BTreeSet::new();
    for c in comps {
        outputs.extend(
            c.actions_of_kind(ActionKind::Output)
                .map(|a| a.name.clone()),
        );
        internals.extend(
            c.actions_of_kind(ActionKind::Internal)
                .map(|a| a.name.clone()),
        );
    }
    let mut actions: Vec<ActionLabel> = Vec::new();
    for c in comps {
        for act in &c.actions {
            if actions.iter().any(|a| a.name == act.name) {
                continue;
            }
            let kind = if outputs.contains(&act.name) {
                ActionKind::Output
            } else if internals.contains(&act.name) {
                ActionKind::Internal
            } else {
                ActionKind::Input
            };
            actions.push(ActionLabel::new(act.name.clone(), kind));
        }
    }
    actions
}

fn build(cs: &ComponentCollection, full_product: bool) -> Result<IoAutomaton> {
    let comps = cs.components();
    for c in comps {
        let report = validate(c);
        if !report.ok() {
            return Err(Error::ValidationFailed {
                id: c.id.clone(),
                report,
            });
        }
    }
    let compat = check_strong_compatibility(cs);
    if !compat.ok() {
        return Err(Error::Incompatible(compat));
    }
    // Shared atomic labels across components would make composite name sets
    // ambiguous and break the no-cross-talk condition on non-participants.
    let mut label_owner: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, c) in comps.iter().enumerate() {
        for label in c.atomic_labels() {
            if let Some(_prev) = label_owner.insert(label, i) {
                return Err(Error::SharedTransitionLabel(label.to_string()));
            }
        }
    }

    let mut participants: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let actions = composite_alphabet(comps);
    for act in &actions {
        let list = comps
            .iter()
            .enumerate()
            .filter(|(_, c)| c.has_action(&act.name))
            .map(|(i, _)| i)
            .collect();
        participants.insert(act.name.clone(), list);
    }
    let ctx = ProductContext {
        comps,
        actions,
        participants,
    };

    let start_vectors = cartesian(comps.iter().map(|c| {
        let mut starts = c.starts.clone();
        starts.dedup();
        starts
    }));
    let start_vectors: Vec<CompositeState> =
        dedup_in_order(start_vectors.into_iter().map(CompositeState::new).collect());

    let mut names = NameAllocator::default();
    let mut state_order: Vec<CompositeState> = Vec::new();
    let mut known: BTreeSet<CompositeState> = BTreeSet::new();
    let mut transitions: Vec<Transition> = Vec::new();
    let mut emitted: BTreeSet<Transition> = BTreeSet::new();

    if full_product {
        let all = cartesian(ctx.comps.iter().map(|c| c.states.clone()));
        for v in all {
            let v = CompositeState::new(v);
            if known.insert(v.clone()) {
                names.assign(&v);
                state_order.push(v);
            }
        }
        for v in &state_order {
            for t in successors(&ctx, v) {
                push_transition(&mut transitions, &mut emitted, &names, v, t);
            }
        }
    } else {
        let mut queue: VecDeque<CompositeState> = VecDeque::new();
        for v in &start_vectors {
            if known.insert(v.clone()) {
                names.assign(v);
                state_order.push(v.clone());
                queue.push_back(v.clone());
            }
        }
        while let Some(v) = queue.pop_front() {
            for t in successors(&ctx, &v) {
                if known.insert(t.target.clone()) {
                    names.assign(&t.target);
                    state_order.push(t.target.clone());
                    queue.push_back(t.target.clone());
                }
                push_transition(&mut transitions, &mut emitted, &names, &v, t);
            }
        }
    }

    let id = comps
        .iter()
        .map(|c| c.id.as_str())
        .collect::<Vec<_>>()
        .join(".");
    Ok(IoAutomaton {
        id,
        states: state_order.iter().map(|v| names.get(v)).collect(),
        actions: ctx.actions,
        transitions,
        starts: start_vectors.iter().map(|v| names.get(v)).collect(),
    })
}

struct CompositeTransition {
    name: TransitionName,
    action: String,
    target: CompositeState,
}

/// All composite moves out of `v`: for each action, every combination of one
/// enabled transition per participating component; non-participants hold
/// their state and contribute no label.
fn successors(ctx: &ProductContext<'_>, v: &CompositeState) -> Vec<CompositeTransition> {
    let mut out = Vec::new();
    for act in &ctx.actions {
        let parts = &ctx.participants[&act.name];
        let mut options: Vec<Vec<&Transition>> = Vec::with_capacity(parts.len());
        let mut blocked = false;
        for &j in parts {
            let local: Vec<&Transition> = ctx.comps[j]
                .transitions
                .iter()
                .filter(|t| t.source == v.parts()[j] && t.action == act.name)
                .collect();
            if local.is_empty() {
                blocked = true;
                break;
            }
            options.push(local);
        }
        if blocked || parts.is_empty() {
            continue;
        }
        for combo in cartesian(options) {
            let mut target = v.parts().to_vec();
            let mut name: Option<TransitionName> = None;
            for (slot, t) in parts.iter().zip(&combo) {
                target[*slot] = t.target.clone();
                name = Some(match name {
                    None => t.name.clone(),
                    Some(n) => n.union(&t.name),
                });
            }
            out.push(CompositeTransition {
                name: name.expect("at least one participant"),
                action: act.name.clone(),
                target: CompositeState::new(target),
            });
        }
    }
    out
}

fn push_transition(
    transitions: &mut Vec<Transition>,
    emitted: &mut BTreeSet<Transition>,
    names: &NameAllocator,
    source: &CompositeState,
    t: CompositeTransition,
) {
    let transition = Transition {
        name: t.name,
        source: names.get(source),
        action: t.action,
        target: names.get(&t.target),
    };
    if emitted.insert(transition.clone()) {
        transitions.push(transition);
    }
}

/// Maps composite vectors to rendered state names, de-clashing with a
/// numeric suffix in discovery order if two vectors render identically.
#[derive(Default)]
struct NameAllocator {
    by_vector: BTreeMap<CompositeState, StateId>,
    taken: BTreeSet<String>,
}

impl NameAllocator {
    fn assign(&mut self, v: &CompositeState) {
        if self.by_vector.contains_key(v) {
            return;
        }
        let base = v.name();
        let mut candidate = base.clone();
        let mut k = 1;
        while !self.taken.insert(candidate.clone()) {
            k += 1;
            candidate = format!("{base}_{k}");
        }
        self.by_vector.insert(v.clone(), StateId::new(candidate));
    }

    fn get(&self, v: &CompositeState) -> StateId {
        self.by_vector
            .get(v)
            .expect("vector named before use")
            .clone()
    }
}

fn cartesian<T: Clone>(parts: impl IntoIterator<Item = Vec<T>>) -> Vec<Vec<T>> {
    let mut acc: Vec<Vec<T>> = vec![Vec::new()];
    for options in parts {
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for prefix in &acc {
            for opt in &options {
                let mut row = prefix.clone();
                row.push(opt.clone());
                next.push(row);
            }
        }
        acc = next;
    }
    acc
}

fn dedup_in_order<T: Ord + Clone>(items: Vec<T>) -> Vec<T> {
    let mut seen = BTreeSet::new();
    items
        .into_iter()
        .filter(|x| seen.insert(x.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{ActionKind, ActionLabel, Transition, TransitionName};
    use crate::fixtures;

    #[test]
    fn candy_components_are_strongly_compatible() {
        let cs = ComponentCollection::new(vec![fixtures::candy_machine(), fixtures::greedy_user()])
            .unwrap();
        assert!(check_strong_compatibility(&cs).ok());
    }

    #[test]
    fn output_overlap_is_reported() {
        let m1 = fixtures::candy_machine();
        let m2 = fixtures::candy_machine().with_id("Machine2");
        let cs = ComponentCollection::new(vec![m1, m2]).unwrap();
        let report = check_strong_compatibility(&cs);
        assert!(!report.ok());
        assert!(report
            .violations
            .iter()
            .any(|v| { v.clause == CompatibilityClause::OutputOverlap && v.action == "s" }));
    }

    #[test]
    fn internal_leak_is_reported() {
        let private = IoAutomaton {
            id: "Private".into(),
            states: vec!["x".into()],
            actions: vec![ActionLabel::new("e", ActionKind::Internal)],
            transitions: vec![Transition::new(TransitionName::atom("t1"), "x", "e", "x")],
            starts: vec!["x".into()],
        };
        let listener = IoAutomaton {
            id: "Listener".into(),
            states: vec!["y".into()],
            actions: vec![ActionLabel::new("e", ActionKind::Input)],
            transitions: vec![Transition::new(TransitionName::atom("t2"), "y", "e", "y")],
            starts: vec!["y".into()],
        };
        let cs = ComponentCollection::new(vec![private, listener]).unwrap();
        let report = check_strong_compatibility(&cs);
        assert!(report
            .violations
            .iter()
            .any(|v| v.clause == CompatibilityClause::InternalLeak && v.action == "e"));
        assert!(matches!(compose(&cs), Err(Error::Incompatible(_))));
    }

    #[test]
    fn candy_composition_synchronizes_dispensing() {
        let sys = fixtures::candy_system();
        let sync = sys
            .transitions
            .iter()
            .find(|t| t.name == TransitionName::new(["p1", "p15"]))
            .expect("synchronized dispense transition");
        assert_eq!(sync.action, "s");
        assert_eq!(sync.source, StateId::from("m1.u1"));
        assert_eq!(sync.target, StateId::from("m0.u0"));
    }

    #[test]
    fn candy_alphabet_follows_the_set_equations() {
        let sys = fixtures::candy_system();
        assert_eq!(sys.actions_of_kind(ActionKind::Input).count(), 0);
        let outputs: Vec<&str> = sys
            .actions_of_kind(ActionKind::Output)
            .map(|a| a.name.as_str())
            .collect();
        assert_eq!(outputs, vec!["b1", "b2", "s", "a"]);
        assert_eq!(sys.actions_of_kind(ActionKind::Internal).count(), 0);
    }

    #[test]
    fn candy_reachable_part_has_three_states() {
        let sys = fixtures::candy_system();
        assert_eq!(
            sys.states,
            vec![
                StateId::from("m0.u0"),
                StateId::from("m1.u1"),
                StateId::from("m2.u1")
            ]
        );
        assert_eq!(sys.transitions.len(), 8);
    }

    #[test]
    fn full_product_contains_the_reachable_part() {
        let cs = ComponentCollection::new(vec![fixtures::candy_machine(), fixtures::greedy_user()])
            .unwrap();
        let reachable_sys = compose(&cs).unwrap();
        let full = compose_full(&cs).unwrap();
        assert_eq!(full.states.len(), 6);
        for t in &reachable_sys.transitions {
            assert!(full.transitions.contains(t), "missing {t:?}");
        }
        let (_, pruned) = crate::automaton::reachable(&full);
        let lhs: BTreeSet<_> = pruned.transitions.iter().collect();
        let rhs: BTreeSet<_> = reachable_sys.transitions.iter().collect();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn singleton_composition_is_isomorphic() {
        let a = fixtures::reactor();
        let cs = ComponentCollection::new(vec![a.clone()]).unwrap();
        let sys = compose(&cs).unwrap();
        let lhs: BTreeSet<_> = sys.states.iter().collect();
        let rhs: BTreeSet<_> = a.states.iter().collect();
        assert_eq!(lhs, rhs);
        assert_eq!(sys.starts, a.starts);
        let lhs: BTreeSet<_> = sys.transitions.iter().collect();
        let rhs: BTreeSet<_> = a.transitions.iter().collect();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn projection_is_one_based() {
        let q = CompositeState::new(vec!["m1".into(), "u1".into()]);
        assert_eq!(q.project(1).unwrap(), &StateId::from("m1"));
        assert_eq!(q.project(2).unwrap(), &StateId::from("u1"));
        assert!(matches!(q.project(0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(q.project(3), Err(Error::IndexOutOfRange { .. })));
        let triple = CompositeState::new(vec!["m0".into(), "u1".into(), "c0".into()]);
        assert_eq!(triple.project(3).unwrap(), &StateId::from("c0"));
    }

    #[test]
    fn composite_state_names_concatenate_single_characters() {
        let q = CompositeState::new(vec!["a".into(), "b".into()]);
        assert_eq!(q.name(), "ab");
        let q = CompositeState::new(vec!["m1".into(), "u1".into()]);
        assert_eq!(q.name(), "m1.u1");
    }

    #[test]
    fn shared_atomic_labels_across_components_are_rejected() {
        let mut user = fixtures::greedy_user();
        // Rename one user transition to collide with a machine label.
        user.transitions[0].name = TransitionName::atom("p1");
        let cs = ComponentCollection::new(vec![fixtures::candy_machine(), user]).unwrap();
        assert!(matches!(
            compose(&cs),
            Err(Error::SharedTransitionLabel(l)) if l == "p1"
        ));
    }

    #[test]
    fn collections_reject_duplicate_ids_and_bad_indices() {
        let a = fixtures::candy_machine();
        assert!(matches!(
            ComponentCollection::new(vec![a.clone(), a.clone()]),
            Err(Error::InvalidCollection(_))
        ));
        assert!(matches!(
            ComponentCollection::with_indices(vec![
                (2, fixtures::candy_machine()),
                (1, fixtures::greedy_user())
            ]),
            Err(Error::InvalidCollection(_))
        ));
        assert!(matches!(
            ComponentCollection::new(vec![]),
            Err(Error::InvalidCollection(_))
        ));
    }
}
