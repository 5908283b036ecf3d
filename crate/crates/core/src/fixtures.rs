//! Shared unit-test models: a reactor-style control loop and a vending
//! machine with a greedy user. The same models ship as text files under
//! `models/`; a model-io test pins the two representations together.

use crate::automaton::{ActionKind, ActionLabel, IoAutomaton, Transition, TransitionName};
use crate::composition::{compose, ComponentCollection};
use crate::meta::{CompletionPolicy, MetaAutomaton, MetaTransition};

fn tr(name: &str, source: &str, action: &str, target: &str) -> Transition {
    Transition::new(TransitionName::atom(name), source, action, target)
}

/// Controller that alternates opening a catalyst flow (`c`) and a water flow
/// (`w`), and on a low-oil signal (`l`) sounds an alarm (`a`) and stops
/// everything (`e`). Every state accepts `l`.
pub fn reactor() -> IoAutomaton {
    IoAutomaton {
        id: "Reactor".into(),
        states: vec!["q0".into(), "q1".into(), "q2".into(), "q3".into()],
        actions: vec![
            ActionLabel::new("l", ActionKind::Input),
            ActionLabel::new("c", ActionKind::Output),
            ActionLabel::new("w", ActionKind::Output),
            ActionLabel::new("a", ActionKind::Output),
            ActionLabel::new("e", ActionKind::Internal),
        ],
        transitions: vec![
            tr("p1", "q0", "c", "q1"),
            tr("p2", "q1", "w", "q0"),
            tr("p3", "q0", "l", "q2"),
            tr("p4", "q1", "l", "q2"),
            tr("p5", "q2", "l", "q2"),
            tr("p6", "q2", "a", "q3"),
            tr("p7", "q3", "l", "q3"),
            tr("p8", "q3", "e", "q3"),
        ],
        starts: vec!["q0".into()],
    }
}

/// Once the catalyst opens (`p1`), only the water transition (`p2`) may
/// follow; everything not downstream of an open catalyst is allowed.
pub fn reactor_constraint() -> MetaAutomaton {
    let mut m = MetaAutomaton::over("WaterAfterCatalyst", &reactor());
    m.states = vec!["s0".into(), "s1".into()];
    m.starts = vec!["s0".into()];
    m.transitions = vec![
        MetaTransition::new("s0", "p1", "s1"),
        MetaTransition::new("s0", "p3", "s0"),
        MetaTransition::new("s0", "p5", "s0"),
        MetaTransition::new("s0", "p6", "s0"),
        MetaTransition::new("s0", "p7", "s0"),
        MetaTransition::new("s0", "p8", "s0"),
        MetaTransition::new("s1", "p2", "s0"),
    ];
    m.policy = CompletionPolicy::Strict;
    m
}

/// Vending machine: two buttons as inputs, two candy bars as outputs. The
/// last button pressed decides which bar the machine will dispense.
pub fn candy_machine() -> IoAutomaton {
    IoAutomaton {
        id: "CandyMachine".into(),
        states: vec!["m0".into(), "m1".into(), "m2".into()],
        actions: vec![
            ActionLabel::new("b1", ActionKind::Input),
            ActionLabel::new("b2", ActionKind::Input),
            ActionLabel::new("s", ActionKind::Output),
            ActionLabel::new("a", ActionKind::Output),
        ],
        transitions: vec![
            tr("p1", "m1", "s", "m0"),
            tr("p2", "m2", "a", "m0"),
            tr("p3", "m0", "b1", "m1"),
            tr("p4", "m0", "b2", "m2"),
            tr("p5", "m1", "b1", "m1"),
            tr("p6", "m1", "b2", "m2"),
            tr("p7", "m2", "b1", "m1"),
            tr("p8", "m2", "b2", "m2"),
        ],
        starts: vec!["m0".into()],
    }
}

/// User who presses buttons without waiting for a candy bar.
pub fn greedy_user() -> IoAutomaton {
    IoAutomaton {
        id: "GreedyUser".into(),
        states: vec!["u0".into(), "u1".into()],
        actions: vec![
            ActionLabel::new("s", ActionKind::Input),
            ActionLabel::new("a", ActionKind::Input),
            ActionLabel::new("b1", ActionKind::Output),
            ActionLabel::new("b2", ActionKind::Output),
        ],
        transitions: vec![
            tr("p9", "u0", "b1", "u1"),
            tr("p10", "u0", "b2", "u1"),
            tr("p11", "u0", "s", "u0"),
            tr("p12", "u0", "a", "u0"),
            tr("p13", "u1", "b1", "u1"),
            tr("p14", "u1", "b2", "u1"),
            tr("p15", "u1", "s", "u0"),
            tr("p16", "u1", "a", "u0"),
        ],
        starts: vec!["u0".into()],
    }
}

/// Reachable product of machine and user, renamed for the constraint.
pub fn candy_system() -> IoAutomaton {
    let cs = ComponentCollection::new(vec![candy_machine(), greedy_user()]).unwrap();
    compose(&cs).unwrap().with_id("CandySystem")
}

/// After a press of one button, every label of that button's presses is
/// refused until the other button is pressed; dispensing labels are left to
/// the implicit-allow completion.
pub fn candy_constraint() -> MetaAutomaton {
    let mut m = MetaAutomaton::over("NoDoublePress", &candy_system());
    m.states = vec!["c0".into(), "c1".into(), "c2".into()];
    m.starts = vec!["c0".into()];
    let b1 = ["p3", "p5", "p7", "p9", "p13"];
    let b2 = ["p4", "p6", "p8", "p10", "p14"];
    let mut transitions = Vec::new();
    for label in b1 {
        transitions.push(MetaTransition::new("c0", label, "c1"));
        transitions.push(MetaTransition::new("c2", label, "c1"));
    }
    for label in b2 {
        transitions.push(MetaTransition::new("c0", label, "c2"));
        transitions.push(MetaTransition::new("c1", label, "c2"));
    }
    m.transitions = transitions;
    m.policy = CompletionPolicy::ImplicitAllow;
    m
}
