use std::fmt::Write;

use super::{GuardForm, TimedAutomaton, Transition};

/// Graphviz rendering. States appear in numeric order; the initial state is bold.
pub fn to_dot(automaton: &TimedAutomaton) -> String {
    let mut out = String::from("digraph tkt {\n  rankdir=LR;\n  node [shape=circle];\n");
    for s in automaton.states() {
        if s == automaton.initial() {
            let _ = writeln!(out, "  {s} [style=bold];");
        } else {
            let _ = writeln!(out, "  {s};");
        }
    }
    for tr in automaton.transitions() {
        let _ = writeln!(out, "  {} -> {} [label=\"{}\"];", tr.source, tr.target, edge_label(tr));
    }
    out.push_str("}\n");
    out
}

fn edge_label(tr: &Transition) -> String {
    let mut parts = vec![format!("{}/{}", tr.operation, tr.event_type)];
    let mut guards = Vec::new();
    for clock in tr.guarded_clocks() {
        let gs = tr.guards_on(clock);
        match gs[0].form {
            GuardForm::Interval { lo, hi } => guards.push(format!("{lo} ≤ {clock} ≤ {hi}")),
            GuardForm::Equality(_) => {
                let mut vals: Vec<String> = gs
                    .iter()
                    .filter_map(|g| match g.form {
                        GuardForm::Equality(v) => Some(v.to_string()),
                        GuardForm::Interval { .. } => None,
                    })
                    .collect();
                vals.dedup();
                if vals.len() == 1 {
                    guards.push(format!("{clock} = {}", vals[0]));
                } else {
                    guards.push(format!("{clock} ∈ {{{}}}", vals.join(", ")));
                }
            }
        }
    }
    if !guards.is_empty() {
        parts.push(guards.join(", "));
    }
    if !tr.resets.is_empty() {
        let resets: Vec<String> = tr.resets.iter().map(|c| format!("{{{c} := 0}}")).collect();
        parts.push(resets.join(" "));
    }
    parts.join("\\n")
}
