//! Seeded faults in otherwise well-formed cases.

use eaa_core::canonical::{decode, encode};
use eaa_core::model::edge_is_legal;
use eaa_core::validator::validate_structure;
use eaa_core::{AssuranceCase, EdgeKind, GsnEdge, NodeKind};
use serde_json::{json, Value};

pub struct Mutant {
    pub name: String,
    pub case: AssuranceCase,
    pub expect: &'static str,
}

fn ids_of(case: &AssuranceCase, kinds: &[NodeKind]) -> Vec<String> {
    case.nodes().filter(|n| kinds.contains(&n.kind)).map(|n| n.id.clone()).collect()
}

/// SupportedBy ancestors of `id` within its module, nearest first.
fn ancestors(case: &AssuranceCase, id: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut frontier = vec![id.to_string()];
    while let Some(next) = frontier.pop() {
        for p in case.parents(&next, EdgeKind::SupportedBy) {
            if !out.iter().any(|o| o == p) {
                out.push(p.to_string());
                frontier.insert(0, p.to_string());
            }
        }
    }
    out
}

pub fn cycle_mutants(case: &AssuranceCase) -> Vec<Mutant> {
    let mut out = Vec::new();
    for (i, id) in ids_of(case, &[NodeKind::Goal, NodeKind::Strategy]).iter().enumerate() {
        let kind = case.node(id).unwrap().kind;
        let ups = ancestors(case, id);
        let legal: Vec<&String> = ups
            .iter()
            .filter(|a| edge_is_legal(kind, case.node(a).unwrap().kind, EdgeKind::SupportedBy))
            .collect();
        let Some(target) = legal.get(i % legal.len().max(1)) else { continue };
        let mut m = case.clone();
        m.connect(id, target, EdgeKind::SupportedBy).unwrap();
        out.push(Mutant {
            name: format!("cycle {id} -> {target}"),
            case: m,
            expect: "E-CYCLE",
        });
        if out.len() == 40 {
            break;
        }
    }
    out
}

fn with_json(case: &AssuranceCase, edit: impl FnOnce(&mut Value)) -> AssuranceCase {
    let mut doc: Value = serde_json::from_str(&encode(case)).unwrap();
    edit(&mut doc);
    decode(&doc.to_string()).expect("mutant still decodes")
}

pub fn illegal_edge_mutants(case: &AssuranceCase) -> Vec<Mutant> {
    use NodeKind::*;
    let triples = [
        (Solution, Goal, EdgeKind::SupportedBy),
        (Goal, Context, EdgeKind::SupportedBy),
        (Strategy, Solution, EdgeKind::SupportedBy),
        (Strategy, Strategy, EdgeKind::SupportedBy),
        (Context, Goal, EdgeKind::InContextOf),
        (Goal, Goal, EdgeKind::InContextOf),
        (Solution, Context, EdgeKind::InContextOf),
        (Goal, Solution, EdgeKind::InContextOf),
        (AwayGoal, Goal, EdgeKind::SupportedBy),
        (Context, Context, EdgeKind::SupportedBy),
    ];
    let mut out = Vec::new();
    for (from_kind, to_kind, kind) in triples {
        assert!(!edge_is_legal(from_kind, to_kind, kind));
        let froms = ids_of(case, &[from_kind]);
        let tos = ids_of(case, &[to_kind]);
        if froms.is_empty() || tos.is_empty() {
            continue;
        }
        for k in 0..3 {
            let (Some(from), Some(to)) = (froms.get(k * 7 % froms.len()), tos.get(k * 11 % tos.len())) else {
                continue;
            };
            if from == to {
                continue;
            }
            let edge = serde_json::to_value(GsnEdge::new(from, to, kind)).unwrap();
            out.push(Mutant {
                name: format!("{from_kind:?} {from} -{kind:?}-> {to_kind:?} {to}"),
                case: with_json(case, |doc| doc["edges"].as_array_mut().unwrap().push(edge)),
                expect: "E-EDGE-ILLEGAL",
            });
        }
    }
    out
}

/// Repoints away node `id` at `module::target`, renaming it and its edges.
fn retarget(doc: &mut Value, id: &str, module: &str, target: &str) {
    let nodes = doc["nodes"].as_array_mut().unwrap();
    let node = nodes.iter_mut().find(|n| n["id"] == id).unwrap();
    let home = node["module"].as_str().unwrap().to_string();
    let new_id = format!("{home}::{target}");
    node["id"] = json!(new_id);
    node["away"] = json!({ "module": module, "target": target });
    for e in doc["edges"].as_array_mut().unwrap() {
        for end in ["from", "to"] {
            if e[end] == id {
                e[end] = json!(new_id);
            }
        }
    }
}

pub fn dangling_mutants(case: &AssuranceCase) -> Vec<Mutant> {
    let mut out = Vec::new();
    let aways: Vec<_> = case.nodes().filter(|n| n.kind == NodeKind::AwayGoal).cloned().collect();
    assert!(aways.len() >= 6);
    for away in &aways {
        let r = away.away.as_ref().unwrap();
        out.push(Mutant {
            name: format!("{} missing target", away.id),
            case: with_json(case, |d| retarget(d, &away.id, &r.module, "NoSuchGoal")),
            expect: "E-AWAY-MISSING",
        });
        out.push(Mutant {
            name: format!("{} unknown module", away.id),
            case: with_json(case, |d| retarget(d, &away.id, "nowhere", &r.target)),
            expect: "E-UNKNOWN-MODULE",
        });
        let private = case
            .module_nodes(&r.module)
            .find(|n| n.kind == NodeKind::Goal && !n.is_public())
            .unwrap();
        out.push(Mutant {
            name: format!("{} private target {}", away.id, private.id),
            case: with_json(case, |d| retarget(d, &away.id, &r.module, &private.id)),
            expect: "E-AWAY-PRIVATE",
        });
    }
    // Fresh away goals under each strategy pointing at goals that do not exist.
    for (i, strategy) in ids_of(case, &[NodeKind::Strategy]).iter().take(10).enumerate() {
        let module = case.node(strategy).unwrap().module.clone();
        let other = case.modules().map(|m| m.id.clone()).find(|m| *m != module).unwrap();
        let target = format!("Ghost{i}");
        let id = format!("{module}::{target}");
        let node = json!({ "id": id, "kind": "away_goal", "module": module, "away": { "module": other, "target": target } });
        let edge = serde_json::to_value(GsnEdge::new(strategy, &id, EdgeKind::SupportedBy)).unwrap();
        out.push(Mutant {
            name: format!("{id} under {strategy}"),
            case: with_json(case, |d| {
                d["nodes"].as_array_mut().unwrap().push(node);
                d["edges"].as_array_mut().unwrap().push(edge);
            }),
            expect: "E-AWAY-MISSING",
        });
    }
    out
}

/// Every mutant family of `case`, with the number of mutants whose expected
/// code the validator failed to report.
pub fn recall(case: &AssuranceCase) -> (usize, Vec<String>) {
    let families = [
        ("cycles", cycle_mutants(case)),
        ("illegal edges", illegal_edge_mutants(case)),
        ("dangling away goals", dangling_mutants(case)),
    ];
    let mut total = 0;
    let mut missed = Vec::new();
    for (family, mutants) in &families {
        for m in mutants {
            total += 1;
            let report = validate_structure(&m.case);
            if report.count(m.expect) == 0 {
                missed.push(format!("{family}: {} (expected {})\n{}", m.name, m.expect, report.to_text()));
            }
        }
    }
    (total, missed)
}
