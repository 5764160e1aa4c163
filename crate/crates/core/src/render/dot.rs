use std::fmt::Write as _;

use crate::model::{AssuranceCase, EdgeKind, GsnNode, NodeFlag, NodeKind};

const WRAP: usize = 36;

fn escape_dot(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            other => out.push(other),
        }
    }
    out
}

/// Greedy word wrap; long words are kept whole.
fn wrap(text: &str, width: usize) -> String {
    let mut lines: Vec<String> = Vec::new();
    let mut line = String::new();
    for word in text.split_whitespace() {
        if !line.is_empty() && line.chars().count() + 1 + word.chars().count() > width {
            lines.push(std::mem::take(&mut line));
        }
        if !line.is_empty() {
            line.push(' ');
        }
        line.push_str(word);
    }
    if !line.is_empty() {
        lines.push(line);
    }
    lines.join("\n")
}

fn shape(kind: NodeKind) -> (&'static str, &'static str) {
    match kind {
        NodeKind::Goal => ("box", "solid"),
        NodeKind::Strategy => ("parallelogram", "solid"),
        NodeKind::Solution => ("circle", "solid"),
        NodeKind::Context => ("box", "rounded"),
        NodeKind::Assumption | NodeKind::Justification => ("ellipse", "solid"),
        NodeKind::AwayGoal => ("box", "dashed"),
        NodeKind::AwayContext => ("box", "rounded,dashed"),
        NodeKind::AwaySolution => ("circle", "dashed"),
    }
}

fn label(case: &AssuranceCase, node: &GsnNode) -> String {
    let mut head = node.label.clone().unwrap_or_else(|| node.id.clone());
    match node.kind {
        NodeKind::Assumption => head.push_str(" (A)"),
        NodeKind::Justification => head.push_str(" (J)"),
        _ => {}
    }
    let mut text = head;
    let statement = match (&node.away, node.statement.is_empty()) {
        (Some(_), true) => case
            .away_target(node)
            .map(|t| t.statement.as_str())
            .unwrap_or_default(),
        _ => node.statement.as_str(),
    };
    if !statement.is_empty() {
        text.push('\n');
        text.push_str(&wrap(statement, WRAP));
    }
    if let Some(away) = &node.away {
        let _ = write!(text, "\n[{}]", away.module);
    }
    text
}

fn adornment(node: &GsnNode) -> Option<&'static str> {
    match (node.has(NodeFlag::Undeveloped), node.has(NodeFlag::Uninstantiated)) {
        (true, true) => Some("◇△"),
        (true, false) => Some("◇"),
        (false, true) => Some("△"),
        (false, false) => None,
    }
}

fn node_statement(case: &AssuranceCase, node: &GsnNode) -> String {
    let (shape, style) = shape(node.kind);
    let mut attrs = format!(
        "shape={shape}, style=\"{style}\", label=\"{}\"",
        escape_dot(&label(case, node))
    );
    if let Some(mark) = adornment(node) {
        let _ = write!(attrs, ", xlabel=\"{mark}\"");
    }
    if node.is_public() {
        attrs.push_str(", peripheries=2");
    }
    format!("\"{}\" [{attrs}];", escape_dot(&node.id))
}

/// Graphviz source with one cluster per module, one node statement per GSN
/// node and one edge statement per GSN edge.
pub fn to_dot(case: &AssuranceCase) -> String {
    let mut out = String::new();
    let title = if case.meta.title.is_empty() { "case" } else { case.meta.title.as_str() };
    writeln!(out, "digraph \"{}\" {{", escape_dot(title)).unwrap();
    writeln!(out, "  rankdir=TB;").unwrap();
    writeln!(out, "  node [fontname=\"Helvetica\", fontsize=10];").unwrap();
    writeln!(out, "  edge [fontname=\"Helvetica\"];").unwrap();
    for module in case.modules() {
        writeln!(out, "  subgraph \"cluster_{}\" {{", escape_dot(&module.id)).unwrap();
        let caption = if module.title.is_empty() { &module.id } else { &module.title };
        writeln!(out, "    label=\"{}\";", escape_dot(caption)).unwrap();
        for node in case.module_nodes(&module.id) {
            writeln!(out, "    {}", node_statement(case, node)).unwrap();
        }
        writeln!(out, "  }}").unwrap();
    }
    for edge in case.edges() {
        let style = match edge.kind {
            EdgeKind::SupportedBy => "arrowhead=normal",
            EdgeKind::InContextOf => "arrowhead=empty",
        };
        writeln!(
            out,
            "  \"{}\" -> \"{}\" [{style}];",
            escape_dot(&edge.from),
            escape_dot(&edge.to)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
