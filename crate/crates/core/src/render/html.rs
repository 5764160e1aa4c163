use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::RenderOptions;
use crate::equilibrium::{SessionState, Snapshot};
use crate::matrices::{analyze, ConstraintDimension, FlagStatus, MatrixAnalysis, SummaryRow};
use crate::model::{AssuranceCase, EdgeKind, GsnNode, NodeFlag, Provenance};
use crate::validator::{transparency_report, EvidenceEntry};

const STYLE: &str = "body{font-family:Helvetica,Arial,sans-serif;margin:2em;color:#222}\
h1{font-size:1.6em}h2{border-bottom:1px solid #ccc;padding-bottom:.2em;margin-top:2em}\
table{border-collapse:collapse;margin:.5em 0 1.5em}th,td{border:1px solid #bbb;padding:.25em .6em;text-align:left;vertical-align:top}\
th{background:#eee}ul.tree{list-style:none;padding-left:1.2em;border-left:1px dotted #bbb}\
.kind{display:inline-block;min-width:6.5em;font-size:.8em;color:#555}\
.id{font-weight:bold;margin-right:.4em}.badge{font-size:.75em;padding:0 .4em;border-radius:.6em;background:#ddd;margin-left:.3em}\
.ctx{color:#555;font-style:italic}.error{color:#a00}.warning{color:#a60}.ok{color:#070}\
code{font-size:.9em}";

pub(super) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            other => out.push(other),
        }
    }
    out
}

fn anchor(id: &str) -> String {
    format!("node-{}", escape(id))
}

struct Tree<'a> {
    case: &'a AssuranceCase,
    rendered: BTreeSet<&'a str>,
    out: String,
}

impl<'a> Tree<'a> {
    fn badges(&self, node: &GsnNode) -> String {
        let mut out = String::new();
        if node.is_public() {
            out.push_str("<span class=\"badge\">public</span>");
        }
        if node.has(NodeFlag::Undeveloped) {
            out.push_str("<span class=\"badge\">undeveloped</span>");
        }
        if node.has(NodeFlag::Uninstantiated) {
            out.push_str("<span class=\"badge\">uninstantiated</span>");
        }
        if let Some(m) = &node.multiplicity {
            let _ = write!(out, "<span class=\"badge\">{}</span>", escape(&m.to_string()));
        }
        if let Some(ev) = &node.evidence {
            let _ = write!(
                out,
                "<span class=\"badge\">{} evidence: {}</span>",
                ev.provenance.as_str(),
                escape(&ev.description)
            );
        }
        out
    }

    fn body(&self, node: &GsnNode) -> String {
        let mut out = format!(
            "<span class=\"kind\">{}</span><span class=\"id\">{}</span>",
            node.kind,
            escape(node.label.as_deref().unwrap_or(&node.id))
        );
        match &node.away {
            Some(away) => {
                let statement = if node.statement.is_empty() {
                    self.case.away_target(node).map(|t| t.statement.as_str()).unwrap_or_default()
                } else {
                    node.statement.as_str()
                };
                let _ = write!(
                    out,
                    "{} <a href=\"#{}\">&rarr; {}</a>",
                    escape(statement),
                    anchor(&away.target),
                    escape(&away.module)
                );
            }
            None => out.push_str(&escape(&node.statement)),
        }
        out.push_str(&self.badges(node));
        out
    }

    fn node(&mut self, node: &'a GsnNode) {
        if !self.rendered.insert(node.id.as_str()) {
            let _ = writeln!(
                self.out,
                "<li><a href=\"#{}\">see {}</a></li>",
                anchor(&node.id),
                escape(&node.id)
            );
            return;
        }
        let body = self.body(node);
        let _ = write!(self.out, "<li id=\"{}\">{body}", anchor(&node.id));
        let contexts: Vec<&str> = self.case.children(&node.id, EdgeKind::InContextOf).collect();
        let supports: Vec<&str> = self.case.children(&node.id, EdgeKind::SupportedBy).collect();
        if !contexts.is_empty() || !supports.is_empty() {
            self.out.push_str("\n<ul class=\"tree\">\n");
            for id in contexts {
                if let Some(c) = self.case.node(id) {
                    if self.rendered.insert(c.id.as_str()) {
                        let body = self.body(c);
                        let _ = writeln!(
                            self.out,
                            "<li id=\"{}\" class=\"ctx\">in context of: {body}</li>",
                            anchor(&c.id)
                        );
                    } else {
                        let _ = writeln!(
                            self.out,
                            "<li class=\"ctx\">in context of: <a href=\"#{}\">{}</a></li>",
                            anchor(&c.id),
                            escape(&c.id)
                        );
                    }
                }
            }
            for id in supports {
                if let Some(child) = self.case.node(id) {
                    self.node(child);
                }
            }
            self.out.push_str("</ul>\n");
        }
        self.out.push_str("</li>\n");
    }

    fn module(&mut self, module: &'a str) {
        let nodes: Vec<&'a GsnNode> = self.case.module_nodes(module).collect();
        let mut roots: Vec<&'a GsnNode> = nodes
            .iter()
            .copied()
            .filter(|n| {
                self.case.parents(&n.id, EdgeKind::SupportedBy).next().is_none()
                    && self.case.parents(&n.id, EdgeKind::InContextOf).next().is_none()
            })
            .collect();
        roots.sort_by_key(|n| (!n.is_public(), n.id.as_str()));
        self.out.push_str("<ul class=\"tree\">\n");
        for root in roots {
            self.node(root);
        }
        for n in nodes {
            if !self.rendered.contains(n.id.as_str()) {
                self.node(n);
            }
        }
        self.out.push_str("</ul>\n");
    }
}

fn rating_cell<T: std::fmt::Display>(out: &mut String, value: T) {
    let _ = write!(out, "<td>{}</td>", escape(&value.to_string()));
}

fn summary_table(out: &mut String, title: &str, magnitude: &str, rows: &[SummaryRow], case: &AssuranceCase) {
    let _ = writeln!(out, "<h3>{title}</h3>");
    if rows.is_empty() {
        out.push_str("<p>No rows.</p>\n");
        return;
    }
    let _ = writeln!(
        out,
        "<table><tr><th>Stakeholder</th><th>Likelihood</th><th>{magnitude}</th><th>Confidence</th><th>Exceptions</th></tr>"
    );
    for s in rows {
        out.push_str("<tr>");
        rating_cell(out, case.stakeholders.name(&s.stakeholder));
        for axis in s.axes() {
            rating_cell(out, axis.render());
        }
        let exceptions: Vec<String> = s
            .exceptions
            .iter()
            .map(|e| format!("{}: {}", e.row, e.reason))
            .collect();
        rating_cell(out, exceptions.join("; "));
        out.push_str("</tr>\n");
    }
    out.push_str("</table>\n");
}

fn matrices_section(out: &mut String, case: &AssuranceCase, analysis: &MatrixAnalysis) {
    let m = &case.matrices;
    out.push_str("<section id=\"matrices\">\n<h2>Matrices</h2>\n");
    if m.is_empty() {
        out.push_str("<p>No matrices recorded.</p>\n</section>\n");
        return;
    }
    out.push_str("<h3>Benefits</h3>\n<table><tr><th>Beneficiary</th><th>Benefit</th><th>Likelihood</th><th>Impact</th><th>Confidence</th></tr>\n");
    for r in &m.benefits {
        out.push_str("<tr>");
        rating_cell(out, case.stakeholders.name(&r.beneficiary));
        rating_cell(out, &r.kind);
        for v in [r.likelihood, r.impact, r.confidence] {
            rating_cell(out, v.label());
        }
        out.push_str("</tr>\n");
    }
    out.push_str("</table>\n<h3>Residual risks</h3>\n<table><tr><th>Risk-bearer</th><th>Hazard</th><th>Likelihood</th><th>Severity</th><th>Confidence</th></tr>\n");
    for r in &m.risks {
        out.push_str("<tr>");
        rating_cell(out, case.stakeholders.name(&r.risk_bearer));
        rating_cell(out, &r.kind);
        for v in [r.likelihood, r.severity, r.confidence] {
            rating_cell(out, v.label());
        }
        out.push_str("</tr>\n");
    }
    out.push_str("</table>\n<h3>Human autonomy</h3>\n<table><tr><th>Autonomy risk-bearer</th>");
    for dim in ConstraintDimension::ALL {
        let _ = write!(out, "<th>{}</th>", escape(dim.describe()));
    }
    out.push_str("</tr>\n");
    for r in &m.autonomy {
        out.push_str("<tr>");
        rating_cell(out, case.stakeholders.name(&r.group));
        for v in r.cells() {
            rating_cell(out, v.label());
        }
        out.push_str("</tr>\n");
    }
    out.push_str("</table>\n");
    summary_table(out, "Distilled benefits", "Impact", &analysis.benefit_summaries, case);
    summary_table(out, "Distilled risks", "Severity", &analysis.risk_summaries, case);
    out.push_str("<h3>Justice matrix</h3>\n");
    if analysis.justice.is_empty() {
        out.push_str("<p>No rows.</p>\n");
    } else {
        out.push_str("<table><tr><th>Stakeholder</th><th>Benefit</th><th>Risk</th><th>Autonomy</th></tr>\n");
        for row in &analysis.justice.rows {
            out.push_str("<tr>");
            rating_cell(out, case.stakeholders.name(&row.stakeholder));
            let describe = |s: &Option<SummaryRow>, word: &str, noun: &str| {
                s.as_ref().map(|s| s.describe(word, noun)).unwrap_or_else(|| "n/a".into())
            };
            rating_cell(out, describe(&row.benefit, "impact", "benefits"));
            rating_cell(out, describe(&row.risk, "severity", "risks"));
            rating_cell(out, row.autonomy.render());
            out.push_str("</tr>\n");
        }
        out.push_str("</table>\n");
    }
    if !analysis.diagnostics.is_empty() {
        out.push_str("<h3>Matrix diagnostics</h3>\n<ul>\n");
        for d in &analysis.diagnostics {
            let class = if d.is_error() { "error" } else { "warning" };
            let _ = writeln!(out, "<li class=\"{class}\">{}</li>", escape(&d.to_string()));
        }
        out.push_str("</ul>\n");
    }
    out.push_str("</section>\n");
}

fn flags_section(out: &mut String, case: &AssuranceCase, analysis: &MatrixAnalysis) {
    out.push_str("<section id=\"flags\">\n<h2>Role-combination flags</h2>\n");
    if analysis.flags.is_empty() {
        out.push_str("<p>No flags raised.</p>\n</section>\n");
        return;
    }
    out.push_str("<table><tr><th>Rule</th><th>Severity</th><th>Stakeholder</th><th>Finding</th><th>Status</th></tr>\n");
    for f in &analysis.flags {
        let status = match (&f.status, &f.resolved_by) {
            (FlagStatus::Resolved, Some(by)) => format!("resolved by {by}"),
            (FlagStatus::Resolved, None) => "resolved".to_string(),
            (FlagStatus::Open, _) => "open".to_string(),
        };
        let class = match f.status {
            FlagStatus::Resolved => "ok",
            FlagStatus::Open if f.is_open_error() => "error",
            FlagStatus::Open => "warning",
        };
        let _ = writeln!(
            out,
            "<tr class=\"{class}\"><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
            f.rule,
            f.severity,
            escape(case.stakeholders.name(&f.stakeholder)),
            escape(&f.message),
            escape(&status)
        );
    }
    out.push_str("</table>\n</section>\n");
}

fn session_section(out: &mut String, case: &AssuranceCase) {
    out.push_str("<section id=\"session\">\n<h2>Deliberation</h2>\n");
    let _ = writeln!(
        out,
        "<p>Current snapshot: <code>{}</code></p>",
        Snapshot::of(case).hash()
    );
    if case.sessions.is_empty() {
        out.push_str("<p>No deliberation session recorded.</p>\n");
    }
    for log in &case.sessions {
        let _ = writeln!(out, "<h3>Session {}</h3>", escape(&log.id));
        match SessionState::replay(log) {
            Ok(state) => {
                let report = state.status();
                let _ = writeln!(
                    out,
                    "<p>Status: <strong>{}</strong> after {} events; snapshot <code>{}</code></p>",
                    report.status,
                    state.events().len(),
                    report.snapshot
                );
                if !report.blockers.is_empty() {
                    out.push_str("<ul>\n");
                    for b in &report.blockers {
                        let _ = writeln!(out, "<li>{}</li>", escape(&b.to_string()));
                    }
                    out.push_str("</ul>\n");
                }
            }
            Err(e) => {
                let _ = writeln!(out, "<p class=\"error\">Log does not replay: {}</p>", escape(&e.to_string()));
            }
        }
    }
    out.push_str("</section>\n");
}

fn evidence_list(out: &mut String, title: &str, entries: &[EvidenceEntry]) {
    let _ = writeln!(out, "<h3>{title}</h3>");
    if entries.is_empty() {
        out.push_str("<p>None.</p>\n");
        return;
    }
    out.push_str("<table><tr><th>Solution</th><th>Evidence</th><th>Open maxims</th></tr>\n");
    for e in entries {
        let open: Vec<&str> = e.open_maxims.iter().map(|m| m.as_str()).collect();
        let _ = writeln!(
            out,
            "<tr><td><a href=\"#{}\">{}</a></td><td>{}</td><td>{}</td></tr>",
            anchor(&e.solution),
            escape(&e.solution),
            escape(&e.evidence.description),
            if open.is_empty() { "none".to_string() } else { open.join(", ") }
        );
    }
    out.push_str("</table>\n");
}

/// A single self-contained HTML page describing the case.
pub fn to_html_report(case: &AssuranceCase, options: &RenderOptions) -> String {
    let title = if case.meta.title.is_empty() { "Assurance case" } else { case.meta.title.as_str() };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>{}</title>\n<style>{STYLE}</style>\n</head>\n<body>",
        escape(title)
    );
    let _ = writeln!(out, "<h1>{}</h1>", escape(title));
    let meta: Vec<(&str, &str)> = ["system", "purpose", "usage", "context"]
        .into_iter()
        .filter_map(|k| case.meta.get(k).filter(|v| !v.is_empty()).map(|v| (k, v)))
        .collect();
    if !meta.is_empty() {
        out.push_str("<dl>\n");
        for (k, v) in meta {
            let _ = writeln!(out, "<dt>{k}</dt><dd>{}</dd>", escape(v));
        }
        out.push_str("</dl>\n");
    }

    out.push_str("<section id=\"argument\">\n<h2>Argument</h2>\n");
    if case.is_empty() {
        out.push_str("<p>The case has no modules.</p>\n");
    }
    let mut tree = Tree {
        case,
        rendered: BTreeSet::new(),
        out: String::new(),
    };
    for module in case.modules() {
        let _ = writeln!(
            tree.out,
            "<h3 id=\"module-{}\">{} <span class=\"badge\">{}</span></h3>",
            escape(&module.id),
            escape(if module.title.is_empty() { &module.id } else { &module.title }),
            escape(&module.id)
        );
        tree.module(&module.id);
    }
    out.push_str(&tree.out);
    out.push_str("</section>\n");

    if options.include_matrices || options.include_flags {
        let analysis = analyze(&case.stakeholders, &case.matrices, &case.annotations);
        if options.include_matrices {
            matrices_section(&mut out, case, &analysis);
        }
        if options.include_flags {
            flags_section(&mut out, case, &analysis);
        }
    }
    session_section(&mut out, case);

    let transparency = transparency_report(case);
    out.push_str("<section id=\"transparency\">\n<h2>Transparency</h2>\n");
    let _ = writeln!(
        out,
        "<p>{} evidence items, {} transparency warnings.</p>",
        transparency.assurance.len() + transparency.machine.len(),
        transparency.diagnostics.summary.warnings
    );
    evidence_list(&mut out, "Assurance transparency", transparency.entries(Provenance::Assurance));
    evidence_list(&mut out, "Machine transparency", transparency.entries(Provenance::Machine));
    out.push_str("</section>\n</body>\n</html>\n");
    out
}
