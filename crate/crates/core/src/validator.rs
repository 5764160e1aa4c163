//! Whole-case checks: structure, completeness inventory and the transparency lint.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;
use serde::{Deserialize, Serialize};

use crate::diag::{Diagnostic, ValidationReport};
use crate::model::{
    edge_is_legal, AssuranceCase, EdgeKind, EvidenceDescriptor, GriceRating, GsnNode, Maxim,
    NodeFlag, NodeId, NodeKind, Provenance,
};

fn at(node: &GsnNode, d: Diagnostic) -> Diagnostic {
    d.with_subject(node.id.clone()).with_span(node.span.clone())
}

fn uninstantiated(node: &GsnNode) -> Diagnostic {
    at(
        node,
        Diagnostic::warning("W-UNINSTANTIATED", format!("{} `{}` awaits instantiation", node.kind, node.id)),
    )
}

/// Strongly connected components that contain a cycle, each sorted, in order.
fn cycles<'a>(graph: &DiGraphMap<&'a str, ()>) -> Vec<Vec<&'a str>> {
    let mut out: Vec<Vec<&str>> = tarjan_scc(graph)
        .into_iter()
        .filter(|scc| scc.len() > 1 || graph.contains_edge(scc[0], scc[0]))
        .map(|mut scc| {
            scc.sort_unstable();
            scc
        })
        .collect();
    out.sort();
    out
}

fn check_edges(case: &AssuranceCase, out: &mut Vec<Diagnostic>) {
    for e in case.edges() {
        let (Some(from), Some(to)) = (case.node(&e.from), case.node(&e.to)) else {
            let missing = if case.node(&e.from).is_none() { &e.from } else { &e.to };
            out.push(
                Diagnostic::error(
                    "E-EDGE-DANGLING",
                    format!("edge `{}` {} `{}` names missing node `{missing}`", e.from, e.kind, e.to),
                )
                .with_subject(e.from.clone()),
            );
            continue;
        };
        if e.from == e.to {
            out.push(at(from, Diagnostic::error("E-EDGE-SELF", format!("`{}` is connected to itself", e.from))));
        } else if !edge_is_legal(from.kind, to.kind, e.kind) {
            out.push(at(
                from,
                Diagnostic::error(
                    "E-EDGE-ILLEGAL",
                    format!("{} `{}` cannot be {} {} `{}`", from.kind, from.id, e.kind, to.kind, to.id),
                ),
            ));
        }
    }
}

fn check_support(case: &AssuranceCase, out: &mut Vec<Diagnostic>) {
    let mut graph = DiGraphMap::new();
    for n in case.nodes() {
        graph.add_node(n.id.as_str());
    }
    for e in case.edges().filter(|e| e.kind == EdgeKind::SupportedBy) {
        if case.node(&e.from).is_some() && case.node(&e.to).is_some() {
            graph.add_edge(e.from.as_str(), e.to.as_str(), ());
        }
    }
    // An away goal stands for its target, so support continues through it.
    for n in case.nodes().filter(|n| n.kind == NodeKind::AwayGoal) {
        if let Some(target) = case.away_target(n) {
            graph.add_edge(n.id.as_str(), target.id.as_str(), ());
        }
    }
    for cycle in cycles(&graph) {
        let node = case.node(cycle[0]).expect("graph nodes are case nodes");
        out.push(at(
            node,
            Diagnostic::error("E-CYCLE", format!("SupportedBy cycle through {}", cycle.join(", "))),
        ));
    }
    for n in case.nodes() {
        let supported = case.children(&n.id, EdgeKind::SupportedBy).next().is_some();
        match n.kind {
            NodeKind::Goal if !supported && !n.has(NodeFlag::Undeveloped) => out.push(at(
                n,
                Diagnostic::error(
                    "E-GOAL-UNSUPPORTED",
                    format!("goal `{}` has no support and is not marked undeveloped", n.id),
                ),
            )),
            NodeKind::Strategy => {
                let goals = case
                    .children(&n.id, EdgeKind::SupportedBy)
                    .filter_map(|c| case.node(c))
                    .any(|c| matches!(c.kind, NodeKind::Goal | NodeKind::AwayGoal));
                if !goals {
                    out.push(at(
                        n,
                        Diagnostic::error("E-STRATEGY-EMPTY", format!("strategy `{}` has no supporting goals", n.id)),
                    ));
                }
            }
            _ => {}
        }
    }
}

fn check_away(case: &AssuranceCase, out: &mut Vec<Diagnostic>) {
    for n in case.nodes() {
        if case.module(&n.module).is_none() {
            out.push(at(n, Diagnostic::error("E-UNKNOWN-MODULE", format!("`{}` belongs to unknown module `{}`", n.id, n.module))));
        }
        let Some(away) = n.away.as_ref().filter(|_| n.kind.is_away()) else {
            continue;
        };
        if case.module(&away.module).is_none() {
            out.push(at(
                n,
                Diagnostic::error("E-UNKNOWN-MODULE", format!("`{}` references unknown module `{}`", n.id, away.module)),
            ));
            continue;
        }
        let Some(target) = case.away_target(n) else {
            out.push(at(
                n,
                Diagnostic::error(
                    "E-AWAY-MISSING",
                    format!("`{}` references `{}`, which module `{}` does not define", n.id, away.target, away.module),
                ),
            ));
            continue;
        };
        if !target.is_public() {
            out.push(at(
                n,
                Diagnostic::error(
                    "E-AWAY-PRIVATE",
                    format!("`{}` references `{}`, which is not public in module `{}`", n.id, target.id, away.module),
                ),
            ));
        }
        if !n.kind.away_accepts(target.kind) {
            out.push(at(
                n,
                Diagnostic::error("E-AWAY-KIND", format!("{} `{}` cannot reference {} `{}`", n.kind, n.id, target.kind, target.id)),
            ));
        }
    }
}

/// Top goals: public goals without a supporting parent. A case that
/// publishes nothing is rooted at all of its parentless goals instead.
fn roots(case: &AssuranceCase) -> Vec<&GsnNode> {
    let top = |n: &&GsnNode| {
        n.kind == NodeKind::Goal && case.parents(&n.id, EdgeKind::SupportedBy).next().is_none()
    };
    let public: Vec<&GsnNode> = case.nodes().filter(top).filter(|n| n.is_public()).collect();
    if public.is_empty() && !case.nodes().any(|n| n.is_public()) {
        case.nodes().filter(top).collect()
    } else {
        public
    }
}

fn check_reachability(case: &AssuranceCase, out: &mut Vec<Diagnostic>) {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut stack: Vec<&str> = roots(case).into_iter().map(|n| n.id.as_str()).collect();
    while let Some(id) = stack.pop() {
        if !seen.insert(id) {
            continue;
        }
        let Some(node) = case.node(id) else { continue };
        stack.extend(case.children(id, EdgeKind::SupportedBy));
        stack.extend(case.children(id, EdgeKind::InContextOf));
        if let Some(target) = case.away_target(node) {
            stack.push(target.id.as_str());
        }
    }
    for n in case.nodes().filter(|n| !seen.contains(n.id.as_str())) {
        out.push(at(
            n,
            Diagnostic::error("E-UNREACHABLE", format!("`{}` is not reachable from any top goal", n.id)),
        ));
    }
}

fn check_module_cycles(case: &AssuranceCase, out: &mut Vec<Diagnostic>) {
    let mut graph = DiGraphMap::new();
    for m in case.modules() {
        graph.add_node(m.id.as_str());
    }
    for n in case.nodes() {
        if let Some(away) = n.away.as_ref().filter(|_| n.kind.is_away()) {
            if away.module != n.module && case.module(&away.module).is_some() && case.module(&n.module).is_some() {
                graph.add_edge(n.module.as_str(), away.module.as_str(), ());
            }
        }
    }
    for cycle in cycles(&graph) {
        out.push(
            Diagnostic::error("E-MODULE-CYCLE", format!("module dependency cycle through {}", cycle.join(", ")))
                .with_subject(cycle[0]),
        );
    }
}

/// Structural well-formedness of the argument graph.
pub fn validate_structure(case: &AssuranceCase) -> ValidationReport {
    let mut out = Vec::new();
    check_edges(case, &mut out);
    check_support(case, &mut out);
    check_away(case, &mut out);
    check_reachability(case, &mut out);
    check_module_cycles(case, &mut out);
    out.extend(case.nodes().filter(|n| n.has(NodeFlag::Uninstantiated)).map(uninstantiated));
    ValidationReport::new(out)
}

/// Lists undeveloped and uninstantiated nodes and rejects unflagged leaf goals.
pub fn inventory_completeness(case: &AssuranceCase) -> ValidationReport {
    let mut out = Vec::new();
    for n in case.nodes() {
        if n.has(NodeFlag::Undeveloped) {
            out.push(at(n, Diagnostic::warning("W-UNDEVELOPED", format!("{} `{}` is undeveloped", n.kind, n.id))));
        }
        if n.has(NodeFlag::Uninstantiated) {
            out.push(uninstantiated(n));
        }
        let flagged = n.has(NodeFlag::Undeveloped) || n.has(NodeFlag::Uninstantiated);
        if n.kind == NodeKind::Goal && !flagged && case.children(&n.id, EdgeKind::SupportedBy).next().is_none() {
            out.push(at(
                n,
                Diagnostic::error("E-UNSUPPORTED", format!("leaf goal `{}` has no solution and is not flagged", n.id)),
            ));
        }
    }
    ValidationReport::new(out)
}

/// One solution's evidence as listed in the transparency report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceEntry {
    pub solution: NodeId,
    pub module: String,
    pub evidence: EvidenceDescriptor,
    /// Maxims rated anything other than adequate.
    pub open_maxims: Vec<Maxim>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransparencyReport {
    pub assurance: Vec<EvidenceEntry>,
    pub machine: Vec<EvidenceEntry>,
    pub diagnostics: ValidationReport,
}

impl TransparencyReport {
    pub fn entries(&self, provenance: Provenance) -> &[EvidenceEntry] {
        match provenance {
            Provenance::Assurance => &self.assurance,
            Provenance::Machine => &self.machine,
        }
    }
}

/// Rates every solution's evidence against the four maxims. A solution
/// without a descriptor counts as unassessed on all four.
pub fn transparency_report(case: &AssuranceCase) -> TransparencyReport {
    let mut report = TransparencyReport::default();
    let mut diags = Vec::new();
    for n in case.nodes().filter(|n| n.kind == NodeKind::Solution) {
        let evidence = n.evidence.clone().unwrap_or_default();
        let kind = match evidence.provenance {
            Provenance::Assurance => "assurance",
            Provenance::Machine => "machine",
        };
        let mut open = Vec::new();
        for maxim in Maxim::ALL {
            let name = maxim.as_str().to_uppercase();
            let d = match evidence.rating(maxim) {
                GriceRating::Adequate => continue,
                GriceRating::Unassessed => Diagnostic::warning(
                    &format!("W-GRICE-{name}"),
                    format!("{} is unassessed for {kind} transparency evidence", maxim.as_str()),
                ),
                GriceRating::Inadequate => Diagnostic::warning(
                    &format!("W-GRICE-{name}-INADEQUATE"),
                    format!("{} is rated inadequate for {kind} transparency evidence", maxim.as_str()),
                ),
            };
            open.push(maxim);
            diags.push(at(n, d));
        }
        let entry = EvidenceEntry {
            solution: n.id.clone(),
            module: n.module.clone(),
            evidence,
            open_maxims: open,
        };
        match entry.evidence.provenance {
            Provenance::Assurance => report.assurance.push(entry),
            Provenance::Machine => report.machine.push(entry),
        }
    }
    report.diagnostics = ValidationReport::new(diags);
    report
}

pub fn validate_transparency(case: &AssuranceCase) -> ValidationReport {
    transparency_report(case).diagnostics
}

/// Every validator pass merged into one report.
pub fn validate(case: &AssuranceCase) -> ValidationReport {
    ValidationReport::merge([
        validate_structure(case),
        inventory_completeness(case),
        validate_transparency(case),
    ])
}

/// Count of nodes per flag, for summaries.
pub fn flag_counts(case: &AssuranceCase) -> BTreeMap<&'static str, usize> {
    let mut out = BTreeMap::new();
    for flag in [NodeFlag::Public, NodeFlag::Undeveloped, NodeFlag::Uninstantiated] {
        out.insert(flag.as_str(), case.nodes().filter(|n| n.has(flag)).count());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::model::{away_id, GsnEdge};

    fn codes(report: &ValidationReport) -> Vec<&str> {
        report.diagnostics.iter().map(|d| d.code.as_str()).collect()
    }

    const SMALL: &str = r#"
module top "Top" {
  goal G1 "top" [public]
  strategy S1 "split"
  context C1 "scope"
  awaygoal B1 from sub
  G1 <- S1
  G1 <~ C1
  S1 <- B1
}
module sub "Sub" {
  goal B1 "benefits" [public]
  solution E1 "evidence" [evidence="report", provenance=assurance, quantity=adequate, quality=adequate, relevance=adequate, manner=adequate]
  B1 <- E1
}
"#;

    #[test]
    fn clean_case() {
        let c = parse(SMALL).unwrap();
        assert!(validate_structure(&c).is_empty(), "{}", validate_structure(&c).to_text());
        assert!(validate(&c).is_empty());
    }

    #[test]
    fn two_goal_cycle_names_both() {
        let c = parse("module m \"M\" {\n goal G1 \"a\" [public]\n goal G2 \"b\"\n G1 <- G2\n G2 <- G1\n}").unwrap();
        let r = validate_structure(&c);
        let cycle: Vec<_> = r.with_code("E-CYCLE").collect();
        assert_eq!(cycle.len(), 1);
        assert!(cycle[0].message.contains("G1") && cycle[0].message.contains("G2"));
    }

    #[test]
    fn cycle_through_away_goal() {
        let text = SMALL.replace("B1 <- E1", "B1 <- E1\n  B1 <- G9\n  awaygoal G1 from top\n  goal G9 \"x\"\n  G9 <- G1");
        let c = parse(&text).unwrap();
        let r = validate_structure(&c);
        assert_eq!(r.count("E-CYCLE"), 1, "{}", r.to_text());
        assert_eq!(r.count("E-MODULE-CYCLE"), 1);
    }

    #[test]
    fn away_findings() {
        let private = SMALL.replace("goal B1 \"benefits\" [public]", "goal B1 \"benefits\"");
        let r = validate_structure(&parse(&private).unwrap());
        assert_eq!(codes(&r), ["E-AWAY-PRIVATE"]);

        let missing = SMALL.replace("awaygoal B1 from sub", "awaygoal B1 from sub\n  awaygoal B2 from sub\n  S1 <- B2");
        let r = validate_structure(&parse(&missing).unwrap());
        assert_eq!(codes(&r), ["E-AWAY-MISSING"]);
        assert_eq!(r.diagnostics[0].subject.as_deref(), Some("top::B2"));

        let kind = SMALL.replace("awaygoal B1 from sub", "awaygoal B1 from sub\n  awaycontext E1 from sub\n  G1 <~ E1");
        let r = validate_structure(&parse(&kind).unwrap());
        assert_eq!(codes(&r), ["E-AWAY-KIND", "E-AWAY-PRIVATE"]);

        let module = SMALL.replace("awaygoal B1 from sub", "awaygoal B1 from sub\n  awaygoal X from nowhere\n  S1 <- X");
        let r = validate_structure(&parse(&module).unwrap());
        assert_eq!(codes(&r), ["E-UNKNOWN-MODULE"]);
    }

    #[test]
    fn illegal_and_dangling_edges() {
        let mut c = parse(SMALL).unwrap();
        c.insert_edge_unchecked(GsnEdge::new("C1", "G1", EdgeKind::SupportedBy));
        c.insert_edge_unchecked(GsnEdge::new("G1", "nope", EdgeKind::SupportedBy));
        let r = validate_structure(&c);
        assert_eq!(r.count("E-EDGE-ILLEGAL"), 1);
        assert_eq!(r.count("E-EDGE-DANGLING"), 1);
    }

    #[test]
    fn unsupported_and_unreachable() {
        let text = "module m \"M\" {\n goal G1 \"a\" [public]\n strategy S \"s\"\n goal L \"leaf\"\n context C \"c\"\n G1 <- S\n}";
        let r = validate_structure(&parse(text).unwrap());
        assert_eq!(
            codes(&r),
            ["E-GOAL-UNSUPPORTED", "E-STRATEGY-EMPTY", "E-UNREACHABLE", "E-UNREACHABLE"]
        );
    }

    #[test]
    fn uninstantiated_findings_are_warnings() {
        let c = parse("module m \"M\" { goal G \"for {group}\" [public, undeveloped, uninstantiated, multiplicity=\"per group\"] }").unwrap();
        let r = validate_structure(&c);
        assert_eq!(codes(&r), ["W-UNINSTANTIATED"]);
        assert!(!r.has_errors());
    }

    #[test]
    fn inventory() {
        let c = parse("module m \"M\" {\n goal G \"a\" [public]\n goal U \"u\" [undeveloped]\n goal L \"l\"\n G <- U\n G <- L\n}").unwrap();
        let r = inventory_completeness(&c);
        assert_eq!(codes(&r), ["E-UNSUPPORTED", "W-UNDEVELOPED"]);
        assert_eq!(r.diagnostics[0].subject.as_deref(), Some("L"));
    }

    #[test]
    fn transparency_lint() {
        let c = parse(SMALL).unwrap();
        assert!(validate_transparency(&c).is_empty());
        let text = SMALL.replace("manner=adequate", "manner=unassessed").replace("provenance=assurance", "provenance=machine")
            .replace("quality=adequate", "quality=inadequate");
        let c = parse(&text).unwrap();
        let t = transparency_report(&c);
        assert_eq!(codes(&t.diagnostics), ["W-GRICE-MANNER", "W-GRICE-QUALITY-INADEQUATE"]);
        assert_eq!(t.machine.len(), 1);
        assert!(t.assurance.is_empty());
        assert_eq!(t.machine[0].open_maxims, [Maxim::Quality, Maxim::Manner]);
    }

    #[test]
    fn report_is_independent_of_insertion_order() {
        let c = parse(SMALL).unwrap();
        let mut rebuilt = AssuranceCase::default();
        for m in c.modules().collect::<Vec<_>>().into_iter().rev() {
            rebuilt.add_module(&m.id, &m.title).unwrap();
        }
        for n in c.nodes().collect::<Vec<_>>().into_iter().rev() {
            rebuilt.add_node(n.clone()).unwrap();
        }
        for e in c.edges().collect::<Vec<_>>().into_iter().rev() {
            rebuilt.insert_edge_unchecked(e.clone());
        }
        rebuilt.insert_edge_unchecked(GsnEdge::new("G1", &away_id("top", "B1"), EdgeKind::InContextOf));
        let mut c2 = c.clone();
        c2.insert_edge_unchecked(GsnEdge::new("G1", &away_id("top", "B1"), EdgeKind::InContextOf));
        assert_eq!(validate(&rebuilt), validate(&c2));
    }
}
