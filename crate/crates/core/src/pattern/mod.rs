//! The ethical assurance argument pattern and its instantiation from bindings.
//!
//! A pattern node with a multiplicity (`per (risk-bearer, hazard)`) is the root
//! of a family. Its supporting subtree inside its module is copied once per
//! bound row, with instance ids such as `NG2[end-users/physical-harm]` and
//! `{param}` placeholders replaced by the row's values. Contexts stay shared.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::{Diagnostic, ValidationReport};
use crate::dsl;
use crate::matrices::rows::slug;
use crate::matrices::{ConstraintDimension, Matrices, MatrixKind};
use crate::model::{
    AssuranceCase, CaseMeta, EdgeKind, GsnEdge, GsnNode, ModelError, NodeFlag, NodeId, NodeKind,
};
use crate::stakeholder::StakeholderRegistry;

pub const PATTERN_SOURCE: &str = include_str!("pattern.eaa");

/// Role parameters a multiplicity or placeholder may name.
pub const PARAMETERS: [&str; 6] = [
    "beneficiary-group",
    "benefit",
    "risk-bearer",
    "hazard",
    "autonomy-risk-bearer",
    "constraint",
];

/// Which goal under the rational/physical control split carries each constraint.
pub const AUTONOMY_ROUTES: [(ConstraintDimension, &str); 5] = [
    (ConstraintDimension::Coerces, "AG5"),
    (ConstraintDimension::Deceives, "AG6"),
    (ConstraintDimension::NotReasonsResponsive, "AG7"),
    (ConstraintDimension::NoConsent, "AG8"),
    (ConstraintDimension::NoPhysicalControl, "AG9"),
];

/// Contexts that take their text from the case metadata.
const META_CONTEXTS: [(&str, &str); 4] = [
    ("TC2", "purpose"),
    ("TC3", "usage"),
    ("TC4", "system"),
    ("TC5", "context"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Benefits,
    Risks,
    Autonomy,
}

impl Family {
    fn params(self) -> [&'static str; 2] {
        match self {
            Family::Benefits => ["beneficiary-group", "benefit"],
            Family::Risks => ["risk-bearer", "hazard"],
            Family::Autonomy => ["autonomy-risk-bearer", "constraint"],
        }
    }

    fn of(params: &[String]) -> Option<Self> {
        [Family::Benefits, Family::Risks, Family::Autonomy]
            .into_iter()
            .find(|f| f.params().as_slice() == params)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("pattern source does not parse: {0}")]
    Parse(String),
    #[error("`{node}` names undeclared parameter `{param}`")]
    UndeclaredParameter { node: NodeId, param: String },
    #[error("`{0}` has a multiplicity that matches no binding table")]
    UnknownFamily(NodeId),
    #[error("`{0}` has a multiplicity but sits inside another family")]
    NestedFamily(NodeId),
    #[error("`{0}` is uninstantiated but has neither a multiplicity nor a placeholder")]
    BareUninstantiated(NodeId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstantiateError {
    #[error("{matrix} row names unknown stakeholder `{stakeholder}`")]
    UnknownStakeholder { matrix: MatrixKind, stakeholder: String },
    #[error("autonomy risk-bearer `{0}` bears no risk in the risk matrix")]
    AutonomyNotRiskBearer(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `{name}` placeholders in a statement, in order of appearance.
pub fn placeholders(statement: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = statement;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let name = &after[..close];
                let ok = name.starts_with(|c: char| c.is_ascii_alphabetic())
                    && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
                if ok {
                    out.push(name);
                }
                rest = &after[close + 1..];
            }
            None => break,
        }
    }
    out
}

/// A checked pattern: an argument whose families are well-formed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    case: AssuranceCase,
    families: BTreeMap<NodeId, (Family, Vec<NodeId>)>,
}

impl Pattern {
    pub fn new(case: AssuranceCase) -> Result<Self, PatternError> {
        for n in case.nodes() {
            let params = n.multiplicity.iter().flat_map(|m| m.params.iter().map(String::as_str));
            for param in params.chain(placeholders(&n.statement)) {
                if !PARAMETERS.contains(&param) {
                    return Err(PatternError::UndeclaredParameter {
                        node: n.id.clone(),
                        param: param.to_string(),
                    });
                }
            }
            if n.has(NodeFlag::Uninstantiated) && n.multiplicity.is_none() && placeholders(&n.statement).is_empty() {
                return Err(PatternError::BareUninstantiated(n.id.clone()));
            }
        }
        let mut families = BTreeMap::new();
        let mut claimed: BTreeSet<NodeId> = BTreeSet::new();
        for n in case.nodes() {
            let Some(m) = &n.multiplicity else { continue };
            let family = Family::of(&m.params).ok_or_else(|| PatternError::UnknownFamily(n.id.clone()))?;
            let subtree = subtree(&case, &n.id);
            for id in &subtree {
                if *id != n.id && case.node(id).is_some_and(|c| c.multiplicity.is_some()) {
                    return Err(PatternError::NestedFamily(id.clone()));
                }
                if !claimed.insert(id.clone()) {
                    return Err(PatternError::NestedFamily(id.clone()));
                }
            }
            families.insert(n.id.clone(), (family, subtree));
        }
        Ok(Self { case, families })
    }

    pub fn parse(text: &str) -> Result<Self, PatternError> {
        let case = dsl::parse_named("pattern.eaa", text).map_err(|d| {
            PatternError::Parse(d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))
        })?;
        Self::new(case)
    }

    pub fn case(&self) -> &AssuranceCase {
        &self.case
    }

    /// Family roots in id order.
    pub fn family_roots(&self) -> impl Iterator<Item = (&str, Family)> {
        self.families.iter().map(|(id, (f, _))| (id.as_str(), *f))
    }
}

pub fn builtin_pattern() -> Pattern {
    Pattern::parse(PATTERN_SOURCE).expect("built-in pattern is well-formed")
}

/// The root and its SupportedBy descendants in the same module, stopping at away nodes.
fn subtree(case: &AssuranceCase, root: &str) -> Vec<NodeId> {
    let Some(module) = case.node(root).map(|n| n.module.clone()) else {
        return Vec::new();
    };
    let mut seen = BTreeSet::new();
    let mut stack = vec![root.to_string()];
    while let Some(id) = stack.pop() {
        if !seen.insert(id.clone()) {
            continue;
        }
        for child in case.children(&id, EdgeKind::SupportedBy) {
            if case.node(child).is_some_and(|c| c.module == module && !c.kind.is_away()) {
                stack.push(child.to_string());
            }
        }
    }
    seen.into_iter().collect()
}

/// Matrices and stakeholders that bind a pattern's families.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingDoc {
    #[serde(default)]
    pub meta: Option<CaseMeta>,
    pub stakeholders: StakeholderRegistry,
    #[serde(default)]
    pub matrices: Matrices,
}

struct Binding {
    key: String,
    values: BTreeMap<&'static str, String>,
    route: Option<ConstraintDimension>,
}

impl BindingDoc {
    fn check(&self) -> Result<(), InstantiateError> {
        let known = |matrix: MatrixKind, id: &str| {
            if self.stakeholders.contains(id) {
                Ok(())
            } else {
                Err(InstantiateError::UnknownStakeholder {
                    matrix,
                    stakeholder: id.to_string(),
                })
            }
        };
        for r in &self.matrices.benefits {
            known(MatrixKind::Benefits, &r.beneficiary)?;
        }
        for r in &self.matrices.risks {
            known(MatrixKind::Risks, &r.risk_bearer)?;
        }
        for r in &self.matrices.autonomy {
            known(MatrixKind::Autonomy, &r.group)?;
            let bears_risk = self
                .matrices
                .risks
                .iter()
                .any(|risk| self.stakeholders.is_within(&risk.risk_bearer, &r.group));
            if !bears_risk {
                return Err(InstantiateError::AutonomyNotRiskBearer(r.group.clone()));
            }
        }
        Ok(())
    }

    fn bindings(&self, family: Family) -> Vec<Binding> {
        let name = |id: &str| self.stakeholders.name(id).to_string();
        let m = &self.matrices;
        match family {
            Family::Benefits => m
                .row_ids(MatrixKind::Benefits)
                .into_iter()
                .zip(&m.benefits)
                .map(|(key, r)| Binding {
                    key,
                    values: BTreeMap::from([("beneficiary-group", name(&r.beneficiary)), ("benefit", r.kind.clone())]),
                    route: None,
                })
                .collect(),
            Family::Risks => m
                .row_ids(MatrixKind::Risks)
                .into_iter()
                .zip(&m.risks)
                .map(|(key, r)| Binding {
                    key,
                    values: BTreeMap::from([("risk-bearer", name(&r.risk_bearer)), ("hazard", r.kind.clone())]),
                    route: None,
                })
                .collect(),
            Family::Autonomy => m
                .autonomy
                .iter()
                .flat_map(|r| {
                    ConstraintDimension::ALL.into_iter().map(move |dim| Binding {
                        key: format!("{}/{}", r.group, slug(dim.as_str())),
                        values: BTreeMap::from([
                            ("autonomy-risk-bearer", name(&r.group)),
                            ("constraint", dim.describe().to_string()),
                        ]),
                        route: Some(dim),
                    })
                })
                .collect(),
        }
    }
}

fn substitute(statement: &str, values: &BTreeMap<&'static str, String>) -> String {
    let mut out = statement.to_string();
    for (param, value) in values {
        out = out.replace(&format!("{{{param}}}"), value);
    }
    out
}

pub fn instance_id(template: &str, key: &str) -> NodeId {
    format!("{template}[{key}]")
}

/// Nodes of a family subtree left out of an instance routed to `route`.
fn excluded(case: &AssuranceCase, members: &[NodeId], route: Option<ConstraintDimension>) -> BTreeSet<NodeId> {
    let Some(route) = route else {
        return BTreeSet::new();
    };
    let mut out = BTreeSet::new();
    for (dim, goal) in AUTONOMY_ROUTES {
        if dim != route && members.iter().any(|m| m == goal) {
            out.extend(subtree(case, goal));
        }
    }
    // Intermediate claims whose every supporter was routed away go too.
    loop {
        let before = out.len();
        for id in members {
            if out.contains(id) {
                continue;
            }
            let children: Vec<&str> = case
                .children(id, EdgeKind::SupportedBy)
                .filter(|c| members.iter().any(|m| m == c))
                .collect();
            if !children.is_empty() && children.iter().all(|c| out.contains(*c)) {
                out.insert(id.clone());
            }
        }
        if out.len() == before {
            return out;
        }
    }
}

/// Outcome of instantiation: the case plus warnings about families left unbound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instantiation {
    pub case: AssuranceCase,
    pub warnings: Vec<Diagnostic>,
}

/// Expands every family of `pattern` with the rows of `bindings`.
pub fn instantiate(pattern: &Pattern, bindings: &BindingDoc) -> Result<Instantiation, InstantiateError> {
    bindings.check()?;
    let template = &pattern.case;
    let mut case = template.clone();
    let mut warnings = Vec::new();
    if let Some(meta) = &bindings.meta {
        case.meta = meta.clone();
        for (id, key) in META_CONTEXTS {
            let value = meta.get(key).unwrap_or_default();
            if let Some(node) = case.node_mut(id).filter(|_| !value.is_empty()) {
                node.statement = format!("{}: {value}", node.statement);
            }
        }
    }
    case.stakeholders = bindings.stakeholders.clone();
    case.matrices = bindings.matrices.clone();

    for (root, (family, members)) in &pattern.families {
        let rows = bindings.bindings(*family);
        if rows.is_empty() {
            warnings.push(
                Diagnostic::warning(
                    "W-EMPTY-BINDING",
                    format!("no {family:?} rows are bound; `{root}` is left uninstantiated").to_lowercase(),
                )
                .with_subject(root.clone()),
            );
            continue;
        }
        let member_set: BTreeSet<&str> = members.iter().map(String::as_str).collect();
        let edges: Vec<GsnEdge> = template
            .edges()
            .filter(|e| member_set.contains(e.from.as_str()) || member_set.contains(e.to.as_str()))
            .cloned()
            .collect();
        for id in members {
            case.remove_node(id);
        }
        for row in &rows {
            let skip = excluded(template, members, row.route);
            let rename = |id: &str| -> NodeId {
                if member_set.contains(id) {
                    instance_id(id, &row.key)
                } else {
                    id.to_string()
                }
            };
            for id in members.iter().filter(|id| !skip.contains(*id)) {
                let mut node = template.node(id).expect("family member exists").clone();
                node.id = rename(id);
                node.statement = substitute(&node.statement, &row.values);
                node.flags.remove(&NodeFlag::Uninstantiated);
                node.multiplicity = None;
                node.span = None;
                case.add_node(node)?;
            }
            for e in edges.iter().filter(|e| !skip.contains(&e.from) && !skip.contains(&e.to)) {
                case.connect(&rename(&e.from), &rename(&e.to), e.kind)?;
            }
        }
    }
    Ok(Instantiation { case, warnings })
}

/// Adds a solution under `goal` and clears the goal's `undeveloped` flag.
pub fn attach_evidence(case: &mut AssuranceCase, goal: &str, solution: GsnNode) -> Result<(), ModelError> {
    if solution.kind != NodeKind::Solution {
        return Err(ModelError::IllegalEdge {
            from: goal.to_string(),
            to: solution.id.clone(),
            from_kind: case.node(goal).map(|n| n.kind).unwrap_or(NodeKind::Goal),
            to_kind: solution.kind,
            kind: EdgeKind::SupportedBy,
        });
    }
    if case.node(goal).is_none() {
        return Err(ModelError::UnknownNode(goal.to_string()));
    }
    let id = case.add_node(solution)?;
    if let Err(e) = case.connect(goal, &id, EdgeKind::SupportedBy) {
        case.remove_node(&id);
        return Err(e);
    }
    if let Some(node) = case.node_mut(goal) {
        node.flags.remove(&NodeFlag::Undeveloped);
    }
    Ok(())
}

/// Whether a strict SupportedBy ancestor of `id` is itself uninstantiated.
fn under_uninstantiated(case: &AssuranceCase, id: &str) -> bool {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<&str> = case.parents(id, EdgeKind::SupportedBy).collect();
    while let Some(p) = stack.pop() {
        if !seen.insert(p) {
            continue;
        }
        if case.node(p).is_some_and(|n| n.has(NodeFlag::Uninstantiated)) {
            return true;
        }
        stack.extend(case.parents(p, EdgeKind::SupportedBy));
    }
    false
}

/// Reports template material left in a case. Findings below an uninstantiated
/// node are folded into that node's finding.
pub fn check_instantiation(case: &AssuranceCase) -> ValidationReport {
    let mut out = Vec::new();
    for n in case.nodes() {
        if under_uninstantiated(case, &n.id) {
            continue;
        }
        let d = if n.has(NodeFlag::Uninstantiated) {
            Diagnostic::error("E-UNINSTANTIATED", format!("{} `{}` has not been instantiated", n.kind, n.id))
        } else if let Some(param) = placeholders(&n.statement).first() {
            Diagnostic::error("E-UNBOUND", format!("statement of `{}` has unbound parameter `{{{param}}}`", n.id))
        } else {
            continue;
        };
        out.push(d.with_subject(n.id.clone()).with_span(n.span.clone()));
    }
    ValidationReport::new(out)
}
