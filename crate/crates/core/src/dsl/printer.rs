use std::fmt::Write as _;

use crate::model::{AssuranceCase, CaseMeta, EdgeKind, GsnNode, Maxim};

fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

fn flags(node: &GsnNode) -> Vec<String> {
    let mut out: Vec<String> = node.flags.iter().map(|f| f.as_str().to_string()).collect();
    if let Some(m) = &node.multiplicity {
        out.push(format!("multiplicity={}", quote(&m.to_string())));
    }
    if let Some(label) = &node.label {
        out.push(format!("label={}", quote(label)));
    }
    if let Some(ev) = &node.evidence {
        out.push(format!("evidence={}", quote(&ev.description)));
        out.push(format!("provenance={}", ev.provenance.as_str()));
        for maxim in Maxim::ALL {
            out.push(format!("{}={}", maxim.as_str(), ev.rating(maxim).as_str()));
        }
    }
    out
}

fn node_line(node: &GsnNode) -> String {
    let mut line = match &node.away {
        Some(away) if node.kind.is_away() => {
            let mut l = format!("{} {} from {}", node.kind.keyword(), away.target, away.module);
            if !node.statement.is_empty() {
                l.push(' ');
                l.push_str(&quote(&node.statement));
            }
            l
        }
        _ => format!("{} {} {}", node.kind.keyword(), node.id, quote(&node.statement)),
    };
    let flags = flags(node);
    if !flags.is_empty() {
        let _ = write!(line, " [{}]", flags.join(", "));
    }
    line
}

/// How `id` is written inside `module`: away nodes of that module by their
/// target name, everything else by full id.
fn reference<'a>(case: &'a AssuranceCase, module: &str, id: &'a str) -> &'a str {
    match case.node(id) {
        Some(n) if n.kind.is_away() && n.module == module => n.local_name(),
        _ => id,
    }
}

fn meta_lines(meta: &CaseMeta, out: &mut String) {
    for key in CaseMeta::KEYS {
        let value = meta.get(key).unwrap_or_default();
        if !value.is_empty() {
            let _ = writeln!(out, "meta {key} {}", quote(value));
        }
    }
}

/// Deterministic text form: metadata, then modules by id, each listing its
/// nodes by id and then the edges leaving its nodes.
pub fn print(case: &AssuranceCase) -> String {
    let mut out = String::new();
    meta_lines(&case.meta, &mut out);
    for module in case.modules() {
        if !out.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "module {} {} {{", module.id, quote(&module.title));
        for node in case.module_nodes(&module.id) {
            let _ = writeln!(out, "  {}", node_line(node));
        }
        for edge in case.edges() {
            let Some(from) = case.node(&edge.from) else { continue };
            if from.module != module.id {
                continue;
            }
            let arrow = match edge.kind {
                EdgeKind::SupportedBy => "<-",
                EdgeKind::InContextOf => "<~",
            };
            let _ = writeln!(
                out,
                "  {} {arrow} {}",
                reference(case, &module.id, &edge.from),
                reference(case, &module.id, &edge.to)
            );
        }
        out.push_str("}\n");
    }
    out
}
