//! Text state dumps: `qualified.name = value`, one per line, sorted.

use crate::state::SimState;

pub fn dump_signals(st: &SimState) -> String {
    let mut lines: Vec<String> = st.sp.iter().map(|(n, v)| format!("{n} = {v}")).collect();
    lines.sort();
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

/// Signals followed by variables.
pub fn dump_state(st: &SimState) -> String {
    let mut lines: Vec<String> = st
        .sp
        .iter()
        .chain(st.vars.iter())
        .map(|(n, v)| format!("{n} = {v}"))
        .collect();
    lines.sort();
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

/// Parses dump text back into `(name, value text)` pairs.
pub fn parse_dump(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .filter_map(|l| {
            let (n, v) = l.split_once(" = ")?;
            Some((n.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Dump lines of a whole instance tree; component values are prefixed with
/// their instance label path (`u1.q = '1'`).
pub fn dump_arch(s: &crate::hierarchy::ArchState, with_vars: bool) -> String {
    let mut lines = Vec::new();
    arch_lines(s, "", with_vars, &mut lines);
    lines.sort();
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

fn arch_lines(s: &crate::hierarchy::ArchState, prefix: &str, with_vars: bool, out: &mut Vec<String>) {
    let st = &s.local;
    let vars = st.vars.iter().filter(|_| with_vars);
    out.extend(st.sp.iter().chain(vars).map(|(n, v)| format!("{prefix}{n} = {v}")));
    for (pm, child) in &s.children {
        arch_lines(child, &format!("{prefix}{}.", pm.label), with_vars, out);
    }
}
