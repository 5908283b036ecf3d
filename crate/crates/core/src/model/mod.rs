//! The textual model format, its canonical serializer, and DOT export.
//!
//! A model file is a sequence of declarations, with `#` line comments:
//!
//! ```text
//! automaton Reactor {
//!   inputs: l;
//!   outputs: c, w, a;
//!   internals: e;
//!   states: q0, q1;
//!   start: q0;
//!   trans:
//!     p1: q0 -c-> q1;
//!     p2: q1 -w-> q0;
//! }
//!
//! constraint WaterAfterCatalyst over Reactor {
//!   states: s0, s1;
//!   start: s0;
//!   trans:
//!     s0 -p1-> s1;
//!     s1 -p2-> s0;
//!   policy: strict;
//! }
//! ```
//!
//! Action kinds are declared once in the header lists. Transition names are
//! bare identifiers; a composite name renders as `{p1,p15}`. Identifiers may
//! contain letters, digits, `_` and `.`, which lets composite state names
//! like `m1.u1` round-trip. Sections may come in any order except that
//! `trans` must be last (followed only by `policy` in a constraint).

mod dot;
mod parse;
mod serialize;

pub use dot::export_dot;
pub use parse::parse_model;
pub use serialize::serialize_model;

use std::collections::BTreeSet;
use std::fmt;

use crate::automaton::IoAutomaton;
use crate::meta::MetaAutomaton;

/// Which kind of declaration a position refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    Automaton,
    Constraint,
}

/// Source position of one declaration, 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclPosition {
    pub kind: DeclKind,
    pub id: String,
    pub line: usize,
    pub col: usize,
}

/// A parsed model file: automata, constraints, declaration positions.
#[derive(Debug, Clone, Default)]
pub struct ModelFile {
    pub automata: Vec<IoAutomaton>,
    pub metas: Vec<MetaAutomaton>,
    pub positions: Vec<DeclPosition>,
}

impl ModelFile {
    pub fn automaton(&self, id: &str) -> Option<&IoAutomaton> {
        self.automata.iter().find(|a| a.id == id)
    }

    pub fn meta(&self, id: &str) -> Option<&MetaAutomaton> {
        self.metas.iter().find(|m| m.id == id)
    }

    /// Equality up to declaration order and transition order; positions are
    /// ignored.
    pub fn structurally_eq(&self, other: &ModelFile) -> bool {
        fn sorted_by_id<T, F: Fn(&T) -> &str>(items: &[T], id: F) -> Vec<&T> {
            let mut v: Vec<&T> = items.iter().collect();
            v.sort_by_key(|x| id(x).to_string());
            v
        }
        let a1 = sorted_by_id(&self.automata, |a| &a.id);
        let a2 = sorted_by_id(&other.automata, |a| &a.id);
        if a1.len() != a2.len() || !a1.iter().zip(&a2).all(|(x, y)| automaton_eq(x, y)) {
            return false;
        }
        let m1 = sorted_by_id(&self.metas, |m| &m.id);
        let m2 = sorted_by_id(&other.metas, |m| &m.id);
        m1.len() == m2.len() && m1.iter().zip(&m2).all(|(x, y)| meta_eq(x, y))
    }
}

fn automaton_eq(a: &IoAutomaton, b: &IoAutomaton) -> bool {
    // Serialization groups actions by kind, so interleaved declarations come
    // back permuted; compare the alphabet as a set.
    a.id == b.id
        && a.states == b.states
        && a.actions.iter().collect::<BTreeSet<_>>() == b.actions.iter().collect::<BTreeSet<_>>()
        && a.starts == b.starts
        && a.transitions.iter().collect::<BTreeSet<_>>()
            == b.transitions.iter().collect::<BTreeSet<_>>()
}

fn meta_eq(a: &MetaAutomaton, b: &MetaAutomaton) -> bool {
    a.id == b.id
        && a.subject == b.subject
        && a.states == b.states
        && a.terminals == b.terminals
        && a.starts == b.starts
        && a.policy == b.policy
        && a.transitions.iter().collect::<BTreeSet<_>>()
            == b.transitions.iter().collect::<BTreeSet<_>>()
}

/// Code classifying a parse-time diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticCode {
    ParseError,
    DuplicateId,
    UnresolvedRef,
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DiagnosticCode::ParseError => "PARSE_ERROR",
            DiagnosticCode::DuplicateId => "DUPLICATE_ID",
            DiagnosticCode::UnresolvedRef => "UNRESOLVED_REF",
        };
        f.write_str(s)
    }
}

/// A parse problem, always positioned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.line, self.col, self.code, self.message
        )
    }
}
