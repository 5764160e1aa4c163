//! Generated well-formed cases for round-trip properties, and DSL token soup for fuzzing.

use eaa_core::model::{
    edge_is_legal, EvidenceDescriptor, GriceRating, Maxim, Multiplicity, NodeFlag, Provenance,
};
use eaa_core::{AssuranceCase, EdgeKind, GsnNode, NodeKind};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct NodePlan {
    kind: u8,
    flags: u8,
    statement: String,
    label: Option<String>,
    multiplicity: Option<Vec<String>>,
    evidence: Option<(String, bool, [u8; 4])>,
    keyed: Option<String>,
}

#[derive(Debug, Clone)]
struct ModulePlan {
    title: String,
    nodes: Vec<NodePlan>,
    aways: Vec<(usize, usize, Option<String>)>,
    edges: Vec<(usize, usize, bool)>,
}

fn text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 ,.\"\\\\\t\n\r{}\\[\\]=<~é→-]{0,24}"
}

fn node_plan() -> impl Strategy<Value = NodePlan> {
    (
        0u8..6,
        0u8..8,
        text(),
        proptest::option::of("[A-Za-z0-9 .]{1,6}"),
        proptest::option::of(proptest::collection::vec("[a-z][a-z0-9_-]{0,8}", 1..3)),
        proptest::option::of((text(), any::<bool>(), [0u8..3, 0u8..3, 0u8..3, 0u8..3])),
        proptest::option::of("[a-z]{1,5}(/[a-z-]{1,8})?"),
    )
        .prop_map(|(kind, flags, statement, label, multiplicity, evidence, keyed)| NodePlan {
            kind,
            flags,
            statement,
            label,
            multiplicity,
            evidence,
            keyed,
        })
}

fn module_plan() -> impl Strategy<Value = ModulePlan> {
    (
        text(),
        proptest::collection::vec(node_plan(), 1..10),
        proptest::collection::vec((0usize..8, 0usize..16, proptest::option::of(text())), 0..4),
        proptest::collection::vec((0usize..20, 0usize..20, any::<bool>()), 0..24),
    )
        .prop_map(|(title, nodes, aways, edges)| ModulePlan {
            title,
            nodes,
            aways,
            edges,
        })
}

const KINDS: [(NodeKind, &str); 6] = [
    (NodeKind::Goal, "G"),
    (NodeKind::Strategy, "S"),
    (NodeKind::Solution, "Sn"),
    (NodeKind::Context, "C"),
    (NodeKind::Assumption, "A"),
    (NodeKind::Justification, "J"),
];

const GRADES: [GriceRating; 3] = [GriceRating::Adequate, GriceRating::Inadequate, GriceRating::Unassessed];

fn build(meta: Vec<Option<String>>, plans: Vec<ModulePlan>) -> AssuranceCase {
    let mut case = AssuranceCase::default();
    for (key, value) in eaa_core::model::CaseMeta::KEYS.iter().zip(meta) {
        if let Some(v) = value {
            case.meta.set(key, v);
        }
    }
    let mut ids: Vec<Vec<String>> = Vec::new();
    for (m, plan) in plans.iter().enumerate() {
        let module = format!("m{m}");
        case.add_module(&module, &plan.title).unwrap();
        let mut local = Vec::new();
        for (i, p) in plan.nodes.iter().enumerate() {
            let (kind, prefix) = KINDS[p.kind as usize];
            let mut id = format!("{prefix}{m}_{i}");
            if let Some(key) = &p.keyed {
                id = format!("{id}[{key}]");
            }
            let mut node = GsnNode::new(&id, kind, &module, &p.statement);
            for (bit, flag) in [NodeFlag::Public, NodeFlag::Undeveloped, NodeFlag::Uninstantiated].into_iter().enumerate() {
                if p.flags & (1 << bit) != 0 {
                    node = node.with_flag(flag);
                }
            }
            node.label = p.label.clone();
            if kind == NodeKind::Goal {
                node.multiplicity = p.multiplicity.as_ref().map(|ps| Multiplicity {
                    params: ps.clone(),
                });
            }
            if let (NodeKind::Solution, Some((desc, machine, grades))) = (kind, &p.evidence) {
                let mut ev = EvidenceDescriptor {
                    description: desc.clone(),
                    provenance: if *machine { Provenance::Machine } else { Provenance::Assurance },
                    ..Default::default()
                };
                for (maxim, g) in Maxim::ALL.into_iter().zip(grades) {
                    ev.set_rating(maxim, GRADES[*g as usize]);
                }
                node = node.with_evidence(ev);
            }
            case.add_node(node).unwrap();
            local.push(id);
        }
        ids.push(local);
    }
    for (m, plan) in plans.iter().enumerate() {
        let module = format!("m{m}");
        let mut local = ids[m].clone();
        for (tm, ti, statement) in &plan.aways {
            let tm = tm % plans.len();
            if tm == m {
                continue;
            }
            let target = &ids[tm][ti % ids[tm].len()];
            let kind = match case.node(target).unwrap().kind {
                NodeKind::Goal => NodeKind::AwayGoal,
                NodeKind::Solution => NodeKind::AwaySolution,
                NodeKind::Strategy => continue,
                _ => NodeKind::AwayContext,
            };
            let mut node = GsnNode::away(kind, &module, &format!("m{tm}"), target);
            node.statement = statement.clone().unwrap_or_default();
            if let Ok(id) = case.add_node(node) {
                local.push(id);
            }
        }
        for (a, b, supported) in &plan.edges {
            let from = &local[a % local.len()];
            let to = &local[b % local.len()];
            let kind = if *supported { EdgeKind::SupportedBy } else { EdgeKind::InContextOf };
            let legal = edge_is_legal(case.node(from).unwrap().kind, case.node(to).unwrap().kind, kind);
            if legal && from != to {
                case.connect(from, to, kind).unwrap();
            }
        }
    }
    case
}

pub fn any_case() -> impl Strategy<Value = AssuranceCase> {
    (
        proptest::collection::vec(proptest::option::of(text()), 5),
        proptest::collection::vec(module_plan(), 1..4),
    )
        .prop_map(|(meta, plans)| build(meta, plans))
}

pub const SOUP: &[&str] = &[
    "module", "goal", "strategy", "solution", "context", "assumption", "justification",
    "awaygoal", "awaycontext", "awaysolution", "from", "meta", "title", "purpose", "{", "}",
    "[", "]", "<-", "<~", "<", "-", "~", "\"", "\"text\"", "\"\\", "\\n", "=", ",", "public",
    "undeveloped", "uninstantiated", "label=", "multiplicity=\"per x\"", "multiplicity=\"per (\"",
    "evidence=\"e\"", "provenance=machine", "quality=bogus", "G1", "G1[a/b]", "m", "m::G1", "#",
    "\n", " ", "\t", "\r", "é", "\u{0}",
];
