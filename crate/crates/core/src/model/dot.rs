//! DOT export. Edges are labeled `name: action` with the kind suffix
//! appended to the action: `?` input, `!` output, `;` internal.

use std::fmt::Write;

use crate::automaton::IoAutomaton;

fn quote(s: &str) -> String {
    let escaped = s.replace('\\', "\\\\").replace('"', "\\\"");
    format!("\"{escaped}\"")
}

pub fn export_dot(a: &IoAutomaton) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(&a.id));
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  node [shape=circle];");
    for q in &a.states {
        let _ = writeln!(out, "  {};", quote(q.as_str()));
    }
    for (i, q) in a.starts.iter().enumerate() {
        let marker = format!("__start{i}");
        let _ = writeln!(out, "  {marker} [shape=point, label=\"\"];");
        let _ = writeln!(out, "  {marker} -> {};", quote(q.as_str()));
    }
    for t in &a.transitions {
        let suffix = a
            .action_kind(&t.action)
            .map(|k| k.suffix().to_string())
            .unwrap_or_default();
        let label = format!("{}: {}{}", t.name, t.action, suffix);
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(t.source.as_str()),
            quote(t.target.as_str()),
            quote(&label)
        );
    }
    let _ = writeln!(out, "}}");
    out
}
