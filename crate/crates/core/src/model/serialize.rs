//! Canonical text form: declarations sorted by id, states and actions in
//! declaration order, transitions sorted by name. Output is LF-only and
//! newline-terminated, and serializing canonical text again is a fixpoint.

use std::fmt::Write;

use super::ModelFile;
use crate::automaton::{ActionKind, IoAutomaton};
use crate::meta::MetaAutomaton;

pub fn serialize_model(m: &ModelFile) -> String {
    let mut automata: Vec<&IoAutomaton> = m.automata.iter().collect();
    automata.sort_by_key(|a| a.id.clone());
    let mut metas: Vec<&MetaAutomaton> = m.metas.iter().collect();
    metas.sort_by_key(|m| m.id.clone());

    let mut out = String::new();
    let mut first = true;
    for a in automata {
        if !first {
            out.push('\n');
        }
        first = false;
        write_automaton(&mut out, a);
    }
    for meta in metas {
        if !first {
            out.push('\n');
        }
        first = false;
        write_meta(&mut out, meta);
    }
    out
}

fn write_ident_list(out: &mut String, keyword: &str, items: &[String]) {
    if items.is_empty() {
        return;
    }
    let _ = writeln!(out, "  {keyword}: {};", items.join(", "));
}

fn write_automaton(out: &mut String, a: &IoAutomaton) {
    let _ = writeln!(out, "automaton {} {{", a.id);
    for (keyword, kind) in [
        ("inputs", ActionKind::Input),
        ("outputs", ActionKind::Output),
        ("internals", ActionKind::Internal),
    ] {
        let names: Vec<String> = a
            .actions_of_kind(kind)
            .map(|act| act.name.clone())
            .collect();
        write_ident_list(out, keyword, &names);
    }
    let states: Vec<String> = a.states.iter().map(|q| q.to_string()).collect();
    write_ident_list(out, "states", &states);
    let starts: Vec<String> = a.starts.iter().map(|q| q.to_string()).collect();
    write_ident_list(out, "start", &starts);

    if !a.transitions.is_empty() {
        let _ = writeln!(out, "  trans:");
        let mut transitions: Vec<_> = a.transitions.iter().collect();
        transitions.sort_by_key(|t| {
            (
                t.name.to_string(),
                t.source.to_string(),
                t.action.clone(),
                t.target.to_string(),
            )
        });
        for t in transitions {
            let _ = writeln!(
                out,
                "    {}: {} -{}-> {};",
                t.name, t.source, t.action, t.target
            );
        }
    }
    let _ = writeln!(out, "}}");
}

fn write_meta(out: &mut String, m: &MetaAutomaton) {
    let _ = writeln!(out, "constraint {} over {} {{", m.id, m.subject);
    let states: Vec<String> = m.states.iter().map(|q| q.to_string()).collect();
    write_ident_list(out, "states", &states);
    let starts: Vec<String> = m.starts.iter().map(|q| q.to_string()).collect();
    write_ident_list(out, "start", &starts);
    if !m.transitions.is_empty() {
        let _ = writeln!(out, "  trans:");
        let mut transitions: Vec<_> = m.transitions.iter().collect();
        transitions.sort();
        for t in transitions {
            let _ = writeln!(out, "    {} -{}-> {};", t.source, t.label, t.target);
        }
    }
    let _ = writeln!(out, "  policy: {};", m.policy);
    let _ = writeln!(out, "}}");
}
