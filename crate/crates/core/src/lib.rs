//! Input/output automata with safety constraints expressed one level up,
//! over transition names instead of actions.
//!
//! A system is modeled as an [`automaton::IoAutomaton`]: states, an action
//! alphabet partitioned into input, output and internal actions, and named
//! transitions. A safety requirement is a [`meta::MetaAutomaton`], an
//! automaton whose alphabet is the transition names of the system it
//! constrains. [`meta::meta_compose`] builds the product that keeps exactly
//! the runs whose transition sequence the constraint authorizes, which is how
//! the constrained system is synthesized rather than checked after the fact.
//!
//! Multi-component systems are covered by [`composition::compose`]
//! (synchronous product of strongly compatible automata, with composite
//! transitions named by the set of participating transition labels) and the
//! constraint machinery applies unchanged to the result.
//!
//! [`trace`] holds the bounded trace-language toolbox (membership at both
//! levels, language inclusion, hazardous-transition diagnosis) and [`model`]
//! the text format, canonical serializer and DOT export used by the CLI.
//!
//! ```
//! use metaguard_core::model::parse_model;
//! use metaguard_core::{diagnose_hazards, meta_compose, ExecutionTrace};
//!
//! let file = parse_model(
//!     "automaton Door {
//!        outputs: open, close;
//!        states: shut, ajar;
//!        start: shut;
//!        trans:
//!          t1: shut -open-> ajar;
//!          t2: ajar -close-> shut;
//!          t3: ajar -open-> ajar;
//!      }
//!      constraint NoReopen over Door {
//!        states: s0, s1;
//!        start: s0;
//!        trans:
//!          s0 -t1-> s1;
//!          s1 -t2-> s0;
//!        policy: strict;
//!      }",
//! )
//! .expect("model parses");
//!
//! let door = file.automaton("Door").unwrap();
//! let rule = file.meta("NoReopen").unwrap();
//!
//! // The product admits open/close cycles but never a second open.
//! let safe = meta_compose(door, rule)?.automaton;
//! let t = ExecutionTrace::parse("open close open");
//! assert!(metaguard_core::accepts_execution(&safe, &t)?);
//! let t = ExecutionTrace::parse("open open");
//! assert!(!metaguard_core::accepts_execution(&safe, &t)?);
//!
//! // And the diagnosis names the transition the rule eliminated.
//! assert_eq!(diagnose_hazards(door, rule)?, ["t3".to_string()].into());
//! # Ok::<(), metaguard_core::Error>(())
//! ```

pub mod automaton;
pub mod composition;
pub mod meta;
pub mod model;
pub mod trace;

mod error;

#[cfg(test)]
pub(crate) mod fixtures;

pub use automaton::{
    reachable, step, validate, ActionKind, ActionLabel, Finding, FindingCode, IoAutomaton,
    Severity, StateId, Transition, TransitionName, ValidationReport, Witness,
};
pub use composition::{
    check_strong_compatibility, compose, compose_full, CompatibilityClause, CompatibilityReport,
    CompatibilityViolation, ComponentCollection, CompositeState,
};
pub use error::{Error, Result};
pub use meta::{
    complete_meta, meta_compose, validate_meta, CompletionPolicy, MetaAutomaton, MetaComposition,
    MetaTransition,
};
pub use trace::{
    accepts_execution, accepts_transition_trace, check_language_inclusion, check_theorem1,
    diagnose_hazards, enumerate_traces, enumerate_traces_capped, runs_of, ExecutionTrace,
    InclusionOutcome, Theorem1Counterexample, Theorem1Report, TransitionTrace, DEFAULT_BOUND_CAP,
};
