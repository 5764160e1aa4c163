//! In-memory assurance case: modules, typed GSN nodes and typed edges.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::SourceSpan;
use crate::equilibrium::SessionLog;
use crate::matrices::{Matrices, ResolutionAnnotation};
use crate::stakeholder::StakeholderRegistry;

pub type NodeId = String;
pub type ModuleId = String;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("metadata field `{0}` must not be empty")]
    MissingMetadata(&'static str),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(NodeId),
    #[error("duplicate module id `{0}`")]
    DuplicateModule(ModuleId),
    #[error("unknown module `{0}`")]
    UnknownModule(ModuleId),
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("invalid identifier `{0}`")]
    InvalidId(String),
    #[error("evidence may only be attached to solutions, not `{0}`")]
    EvidenceOnNonSolution(NodeId),
    #[error("away node `{0}` must name a target module and node")]
    MissingAwayTarget(NodeId),
    #[error("`{0}` is not an away node and cannot carry an away target")]
    UnexpectedAwayTarget(NodeId),
    #[error("away node `{found}` must have id `{expected}`")]
    AwayIdMismatch { found: NodeId, expected: NodeId },
    #[error("node `{0}` cannot be connected to itself")]
    SelfEdge(NodeId),
    #[error("illegal edge: {from_kind} `{from}` {kind} {to_kind} `{to}`")]
    IllegalEdge {
        from: NodeId,
        to: NodeId,
        from_kind: NodeKind,
        to_kind: NodeKind,
        kind: EdgeKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Goal,
    Strategy,
    Solution,
    Context,
    Assumption,
    Justification,
    AwayGoal,
    AwayContext,
    AwaySolution,
}

impl NodeKind {
    pub const ALL: [NodeKind; 9] = [
        NodeKind::Goal,
        NodeKind::Strategy,
        NodeKind::Solution,
        NodeKind::Context,
        NodeKind::Assumption,
        NodeKind::Justification,
        NodeKind::AwayGoal,
        NodeKind::AwayContext,
        NodeKind::AwaySolution,
    ];

    pub fn is_away(self) -> bool {
        matches!(
            self,
            NodeKind::AwayGoal | NodeKind::AwayContext | NodeKind::AwaySolution
        )
    }

    /// DSL keyword.
    pub fn keyword(self) -> &'static str {
        match self {
            NodeKind::Goal => "goal",
            NodeKind::Strategy => "strategy",
            NodeKind::Solution => "solution",
            NodeKind::Context => "context",
            NodeKind::Assumption => "assumption",
            NodeKind::Justification => "justification",
            NodeKind::AwayGoal => "awaygoal",
            NodeKind::AwayContext => "awaycontext",
            NodeKind::AwaySolution => "awaysolution",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.keyword() == word)
    }

    /// Whether an away node of this kind may reference a node of kind `target`.
    pub fn away_accepts(self, target: NodeKind) -> bool {
        match self {
            NodeKind::AwayGoal => target == NodeKind::Goal,
            NodeKind::AwaySolution => target == NodeKind::Solution,
            NodeKind::AwayContext => matches!(
                target,
                NodeKind::Context | NodeKind::Assumption | NodeKind::Justification
            ),
            _ => false,
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeFlag {
    Public,
    Undeveloped,
    Uninstantiated,
}

impl NodeFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeFlag::Public => "public",
            NodeFlag::Undeveloped => "undeveloped",
            NodeFlag::Uninstantiated => "uninstantiated",
        }
    }

    pub fn from_word(word: &str) -> Option<Self> {
        match word {
            "public" => Some(NodeFlag::Public),
            "undeveloped" => Some(NodeFlag::Undeveloped),
            "uninstantiated" => Some(NodeFlag::Uninstantiated),
            _ => None,
        }
    }
}

/// Role iteration of a pattern node, `per X` or `per (X, Y)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Multiplicity {
    pub params: Vec<String>,
}

impl Multiplicity {
    pub fn per(params: &[&str]) -> Self {
        Self {
            params: params.iter().map(|p| p.to_string()).collect(),
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.params.as_slice() {
            [one] => write!(f, "per {one}"),
            many => write!(f, "per ({})", many.join(", ")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid multiplicity expression `{0}`; expected `per X` or `per (X, Y)`")]
pub struct MultiplicityError(pub String);

impl FromStr for Multiplicity {
    type Err = MultiplicityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || MultiplicityError(s.to_string());
        let rest = s.trim().strip_prefix("per").ok_or_else(err)?;
        if !rest.starts_with(char::is_whitespace) && !rest.starts_with('(') {
            return Err(err());
        }
        let rest = rest.trim();
        let inner = match rest.strip_prefix('(') {
            Some(r) => r.strip_suffix(')').ok_or_else(err)?,
            None => rest,
        };
        let params: Vec<String> = inner.split(',').map(|p| p.trim().to_string()).collect();
        let param_ok = |p: &String| {
            !p.is_empty()
                && p.chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        };
        if params.is_empty() || !params.iter().all(param_ok) {
            return Err(err());
        }
        Ok(Self { params })
    }
}

impl TryFrom<String> for Multiplicity {
    type Error = MultiplicityError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Multiplicity> for String {
    fn from(value: Multiplicity) -> Self {
        value.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Maxim {
    Quantity,
    Quality,
    Relevance,
    Manner,
}

impl Maxim {
    pub const ALL: [Maxim; 4] = [Maxim::Quantity, Maxim::Quality, Maxim::Relevance, Maxim::Manner];

    pub fn as_str(self) -> &'static str {
        match self {
            Maxim::Quantity => "quantity",
            Maxim::Quality => "quality",
            Maxim::Relevance => "relevance",
            Maxim::Manner => "manner",
        }
    }

    pub fn from_word(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == word)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GriceRating {
    Adequate,
    Inadequate,
    #[default]
    Unassessed,
}

impl GriceRating {
    pub fn as_str(self) -> &'static str {
        match self {
            GriceRating::Adequate => "adequate",
            GriceRating::Inadequate => "inadequate",
            GriceRating::Unassessed => "unassessed",
        }
    }

    pub fn from_word(word: &str) -> Option<Self> {
        match word {
            "adequate" => Some(GriceRating::Adequate),
            "inadequate" => Some(GriceRating::Inadequate),
            "unassessed" => Some(GriceRating::Unassessed),
            _ => None,
        }
    }
}

/// Whether evidence informs about human decisions (assurance transparency)
/// or about the system internals (machine transparency).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    #[default]
    Assurance,
    Machine,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Assurance => "assurance",
            Provenance::Machine => "machine",
        }
    }

    pub fn from_word(word: &str) -> Option<Self> {
        match word {
            "assurance" => Some(Provenance::Assurance),
            "machine" => Some(Provenance::Machine),
            _ => None,
        }
    }
}

/// A link to evidence, rated against the four communication maxims.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EvidenceDescriptor {
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub provenance: Provenance,
    pub quantity: GriceRating,
    pub quality: GriceRating,
    pub relevance: GriceRating,
    pub manner: GriceRating,
}

impl EvidenceDescriptor {
    pub fn rating(&self, maxim: Maxim) -> GriceRating {
        match maxim {
            Maxim::Quantity => self.quantity,
            Maxim::Quality => self.quality,
            Maxim::Relevance => self.relevance,
            Maxim::Manner => self.manner,
        }
    }

    pub fn set_rating(&mut self, maxim: Maxim, rating: GriceRating) {
        match maxim {
            Maxim::Quantity => self.quantity = rating,
            Maxim::Quality => self.quality = rating,
            Maxim::Relevance => self.relevance = rating,
            Maxim::Manner => self.manner = rating,
        }
    }

    pub fn all_adequate(description: &str, provenance: Provenance) -> Self {
        Self {
            description: description.to_string(),
            provenance,
            quantity: GriceRating::Adequate,
            quality: GriceRating::Adequate,
            relevance: GriceRating::Adequate,
            manner: GriceRating::Adequate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AwayRef {
    pub module: ModuleId,
    pub target: NodeId,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GsnNode {
    pub id: NodeId,
    pub kind: NodeKind,
    #[serde(default)]
    pub statement: String,
    pub module: ModuleId,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub flags: BTreeSet<NodeFlag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<Multiplicity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<EvidenceDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub away: Option<AwayRef>,
    /// Label the element carries in the published pattern diagrams, when it differs from `id`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

// Spans are provenance, not content.
impl PartialEq for GsnNode {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.kind == other.kind
            && self.statement == other.statement
            && self.module == other.module
            && self.flags == other.flags
            && self.multiplicity == other.multiplicity
            && self.evidence == other.evidence
            && self.away == other.away
            && self.label == other.label
    }
}

impl Eq for GsnNode {}

impl GsnNode {
    pub fn new(id: &str, kind: NodeKind, module: &str, statement: &str) -> Self {
        Self {
            id: id.to_string(),
            kind,
            statement: statement.to_string(),
            module: module.to_string(),
            flags: BTreeSet::new(),
            multiplicity: None,
            evidence: None,
            away: None,
            label: None,
            span: None,
        }
    }

    pub fn goal(id: &str, module: &str, statement: &str) -> Self {
        Self::new(id, NodeKind::Goal, module, statement)
    }

    /// An away node declared in `module` that references `target` in `target_module`.
    /// Its id is `module::target`.
    pub fn away(kind: NodeKind, module: &str, target_module: &str, target: &str) -> Self {
        let mut node = Self::new(&away_id(module, target), kind, module, "");
        node.away = Some(AwayRef {
            module: target_module.to_string(),
            target: target.to_string(),
        });
        node
    }

    pub fn with_flag(mut self, flag: NodeFlag) -> Self {
        self.flags.insert(flag);
        self
    }

    pub fn with_evidence(mut self, evidence: EvidenceDescriptor) -> Self {
        self.evidence = Some(evidence);
        self
    }

    pub fn has(&self, flag: NodeFlag) -> bool {
        self.flags.contains(&flag)
    }

    pub fn is_public(&self) -> bool {
        self.has(NodeFlag::Public)
    }

    /// The name this node is written under inside its own module.
    pub fn local_name(&self) -> &str {
        match &self.away {
            Some(away) if self.kind.is_away() => &away.target,
            _ => &self.id,
        }
    }
}

/// Id of an away node declared in `module` for `target`.
pub fn away_id(module: &str, target: &str) -> NodeId {
    format!("{module}::{target}")
}

/// Identifier grammar shared with the DSL: a leading letter or underscore, then
/// letters, digits and `_ - . : /`, optionally followed by bracketed instance keys
/// such as `BG2[end-users/improved-mobility]`.
pub fn is_valid_id(id: &str) -> bool {
    let mut chars = id.chars().peekable();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    let mut depth = 0usize;
    for c in chars {
        match c {
            '[' => depth += 1,
            ']' => {
                if depth == 0 {
                    return false;
                }
                depth -= 1;
            }
            c if is_id_char(c) => {}
            _ => return false,
        }
    }
    depth == 0
}

pub fn is_valid_module_id(id: &str) -> bool {
    is_valid_id(id) && !id.contains(['[', ']', ':'])
}

pub(crate) fn is_id_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '/')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    SupportedBy,
    InContextOf,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::SupportedBy => "SupportedBy",
            EdgeKind::InContextOf => "InContextOf",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GsnEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub kind: EdgeKind,
}

impl GsnEdge {
    pub fn new(from: &str, to: &str, kind: EdgeKind) -> Self {
        Self {
            from: from.to_string(),
            to: to.to_string(),
            kind,
        }
    }
}

/// GSN connection rules.
pub fn edge_is_legal(from: NodeKind, to: NodeKind, kind: EdgeKind) -> bool {
    use NodeKind::*;
    match kind {
        EdgeKind::SupportedBy => match from {
            Goal => matches!(to, Goal | Strategy | Solution | AwayGoal),
            Strategy => matches!(to, Goal | AwayGoal),
            _ => false,
        },
        EdgeKind::InContextOf => {
            matches!(from, Goal | Strategy)
                && matches!(to, Context | Assumption | Justification | AwayContext)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgModule {
    pub id: ModuleId,
    pub title: String,
}

/// Case metadata mirroring the system definition, purpose, usage and context artefacts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseMeta {
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub system: String,
    #[serde(default)]
    pub purpose: String,
    #[serde(default)]
    pub usage: String,
    #[serde(default)]
    pub context: String,
}

impl CaseMeta {
    pub const KEYS: [&'static str; 5] = ["title", "system", "purpose", "usage", "context"];

    pub fn get(&self, key: &str) -> Option<&str> {
        Some(match key {
            "title" => &self.title,
            "system" => &self.system,
            "purpose" => &self.purpose,
            "usage" => &self.usage,
            "context" => &self.context,
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, value: String) -> bool {
        let slot = match key {
            "title" => &mut self.title,
            "system" => &mut self.system,
            "purpose" => &mut self.purpose,
            "usage" => &mut self.usage,
            "context" => &mut self.context,
            _ => return false,
        };
        *slot = value;
        true
    }
}

/// A whole assurance case. Cloning yields an independent snapshot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssuranceCase {
    pub meta: CaseMeta,
    modules: BTreeMap<ModuleId, ArgModule>,
    nodes: BTreeMap<NodeId, GsnNode>,
    edges: BTreeSet<GsnEdge>,
    pub stakeholders: StakeholderRegistry,
    pub matrices: Matrices,
    pub annotations: Vec<ResolutionAnnotation>,
    pub sessions: Vec<SessionLog>,
}

impl AssuranceCase {
    /// An empty case for the given system. Purpose and context must be stated.
    pub fn create(meta: CaseMeta) -> Result<Self, ModelError> {
        if meta.purpose.trim().is_empty() {
            return Err(ModelError::MissingMetadata("purpose"));
        }
        if meta.context.trim().is_empty() {
            return Err(ModelError::MissingMetadata("context"));
        }
        Ok(Self {
            meta,
            ..Self::default()
        })
    }

    pub fn add_module(&mut self, id: &str, title: &str) -> Result<(), ModelError> {
        if !is_valid_module_id(id) {
            return Err(ModelError::InvalidId(id.to_string()));
        }
        if self.modules.contains_key(id) {
            return Err(ModelError::DuplicateModule(id.to_string()));
        }
        self.modules.insert(
            id.to_string(),
            ArgModule {
                id: id.to_string(),
                title: title.to_string(),
            },
        );
        Ok(())
    }

    pub fn add_node(&mut self, node: GsnNode) -> Result<NodeId, ModelError> {
        if !is_valid_id(&node.id) {
            return Err(ModelError::InvalidId(node.id));
        }
        if self.nodes.contains_key(&node.id) {
            return Err(ModelError::DuplicateNode(node.id));
        }
        if !self.modules.contains_key(&node.module) {
            return Err(ModelError::UnknownModule(node.module));
        }
        if node.evidence.is_some() && node.kind != NodeKind::Solution {
            return Err(ModelError::EvidenceOnNonSolution(node.id));
        }
        match (node.kind.is_away(), &node.away) {
            (true, None) => return Err(ModelError::MissingAwayTarget(node.id)),
            (false, Some(_)) => return Err(ModelError::UnexpectedAwayTarget(node.id)),
            (true, Some(away)) => {
                let expected = away_id(&node.module, &away.target);
                if node.id != expected {
                    return Err(ModelError::AwayIdMismatch {
                        found: node.id,
                        expected,
                    });
                }
            }
            _ => {}
        }
        let id = node.id.clone();
        self.nodes.insert(id.clone(), node);
        Ok(id)
    }

    pub fn connect(&mut self, from: &str, to: &str, kind: EdgeKind) -> Result<GsnEdge, ModelError> {
        let from_kind = self.kind_of(from)?;
        let to_kind = self.kind_of(to)?;
        if from == to {
            return Err(ModelError::SelfEdge(from.to_string()));
        }
        if !edge_is_legal(from_kind, to_kind, kind) {
            return Err(ModelError::IllegalEdge {
                from: from.to_string(),
                to: to.to_string(),
                from_kind,
                to_kind,
                kind,
            });
        }
        let edge = GsnEdge::new(from, to, kind);
        self.edges.insert(edge.clone());
        Ok(edge)
    }

    fn kind_of(&self, id: &str) -> Result<NodeKind, ModelError> {
        self.nodes
            .get(id)
            .map(|n| n.kind)
            .ok_or_else(|| ModelError::UnknownNode(id.to_string()))
    }

    /// Stores an edge without checking legality.
    pub(crate) fn insert_edge_unchecked(&mut self, edge: GsnEdge) {
        self.edges.insert(edge);
    }

    /// Removes a node and every edge touching it.
    pub(crate) fn remove_node(&mut self, id: &str) -> Option<GsnNode> {
        let node = self.nodes.remove(id)?;
        self.edges.retain(|e| e.from != id && e.to != id);
        Some(node)
    }

    pub(crate) fn node_mut(&mut self, id: &str) -> Option<&mut GsnNode> {
        self.nodes.get_mut(id)
    }

    pub fn node(&self, id: &str) -> Option<&GsnNode> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &GsnNode> {
        self.nodes.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = &GsnEdge> {
        self.edges.iter()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn module(&self, id: &str) -> Option<&ArgModule> {
        self.modules.get(id)
    }

    pub fn modules(&self) -> impl Iterator<Item = &ArgModule> {
        self.modules.values()
    }

    pub fn module_nodes<'a>(&'a self, module: &'a str) -> impl Iterator<Item = &'a GsnNode> + 'a {
        self.nodes.values().filter(move |n| n.module == module)
    }

    /// Public interface of a module.
    pub fn public_nodes<'a>(&'a self, module: &'a str) -> impl Iterator<Item = &'a GsnNode> + 'a {
        self.module_nodes(module).filter(|n| n.is_public())
    }

    /// Targets of outgoing edges of the given kind, in id order.
    pub fn children<'a>(&'a self, id: &'a str, kind: EdgeKind) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .range(GsnEdge::new(id, "", EdgeKind::SupportedBy)..)
            .take_while(move |e| e.from == id)
            .filter(move |e| e.kind == kind)
            .map(|e| e.to.as_str())
    }

    pub fn parents<'a>(&'a self, id: &'a str, kind: EdgeKind) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .iter()
            .filter(move |e| e.to == id && e.kind == kind)
            .map(|e| e.from.as_str())
    }

    /// Resolves an away node to the node it references, if present.
    pub fn away_target(&self, node: &GsnNode) -> Option<&GsnNode> {
        let away = node.away.as_ref()?;
        self.nodes
            .get(&away.target)
            .filter(|t| t.module == away.module)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.modules.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn robotaxi_meta() -> CaseMeta {
        CaseMeta {
            title: "Robo-taxi service".into(),
            system: "Driverless cyber-physical taxi with a sense-understand-decide-act loop".into(),
            purpose: "Transport passengers within a specified operational design domain".into(),
            usage: "Trips from the city's major railway station to locations within the ODD".into(),
            context: "A 5-mile wide area in the city".into(),
        }
    }

    fn case_with_module() -> AssuranceCase {
        let mut case = AssuranceCase::create(robotaxi_meta()).unwrap();
        case.add_module("principles", "Principles").unwrap();
        case
    }

    #[test]
    fn create_case_starts_empty() {
        let case = AssuranceCase::create(robotaxi_meta()).unwrap();
        assert_eq!(case.node_count(), 0);
        assert_eq!(case.meta, robotaxi_meta());
    }

    #[test]
    fn create_case_requires_purpose() {
        let mut meta = robotaxi_meta();
        meta.purpose = String::new();
        assert_eq!(
            AssuranceCase::create(meta),
            Err(ModelError::MissingMetadata("purpose"))
        );
    }

    #[test]
    fn add_node_and_duplicate() {
        let mut case = case_with_module();
        case.add_node(GsnNode::goal("TG1", "principles", "use is acceptable"))
            .unwrap();
        assert_eq!(case.node("TG1").unwrap().kind, NodeKind::Goal);
        assert_eq!(case.node_count(), 1);
        let dup = case.add_node(GsnNode::goal("TG1", "principles", "again"));
        assert_eq!(dup, Err(ModelError::DuplicateNode("TG1".into())));
    }

    #[test]
    fn add_node_rejects_unknown_module_and_misplaced_evidence() {
        let mut case = case_with_module();
        assert!(matches!(
            case.add_node(GsnNode::goal("G", "nowhere", "x")),
            Err(ModelError::UnknownModule(_))
        ));
        let goal = GsnNode::goal("G", "principles", "x").with_evidence(EvidenceDescriptor::default());
        assert!(matches!(
            case.add_node(goal),
            Err(ModelError::EvidenceOnNonSolution(_))
        ));
    }

    #[test]
    fn unassessed_solution_is_accepted_by_constructor() {
        let mut case = case_with_module();
        let sn = GsnNode::new("Sn1", NodeKind::Solution, "principles", "report")
            .with_evidence(EvidenceDescriptor::default());
        assert!(case.add_node(sn).is_ok());
    }

    #[test]
    fn connect_follows_legality_table() {
        let mut case = case_with_module();
        case.add_node(GsnNode::goal("TG1", "principles", "g")).unwrap();
        case.add_node(GsnNode::new("TA1", NodeKind::Strategy, "principles", "s"))
            .unwrap();
        case.add_node(GsnNode::new("TC1", NodeKind::Context, "principles", "c"))
            .unwrap();
        case.add_node(GsnNode::new("Sn1", NodeKind::Solution, "principles", "e"))
            .unwrap();
        assert!(case.connect("TG1", "TA1", EdgeKind::SupportedBy).is_ok());
        assert!(case.connect("TG1", "TC1", EdgeKind::InContextOf).is_ok());
        assert!(matches!(
            case.connect("Sn1", "TG1", EdgeKind::SupportedBy),
            Err(ModelError::IllegalEdge { .. })
        ));
        assert!(matches!(
            case.connect("TG1", "TG1", EdgeKind::SupportedBy),
            Err(ModelError::SelfEdge(_))
        ));
        assert_eq!(case.children("TG1", EdgeKind::SupportedBy).collect::<Vec<_>>(), ["TA1"]);
    }

    #[test]
    fn legality_table_is_exact() {
        use NodeKind::*;
        let mut legal = Vec::new();
        for from in NodeKind::ALL {
            for to in NodeKind::ALL {
                for kind in [EdgeKind::SupportedBy, EdgeKind::InContextOf] {
                    if edge_is_legal(from, to, kind) {
                        legal.push((from, to, kind));
                    }
                }
            }
        }
        assert_eq!(legal.len(), 4 + 2 + 8);
        assert!(!legal.iter().any(|(f, _, _)| matches!(f, Solution | AwayGoal | AwayContext | AwaySolution | Context)));
    }

    #[test]
    fn ids() {
        assert!(is_valid_id("TG1"));
        assert!(is_valid_id("JC-EQ"));
        assert!(is_valid_id("justice::BG1"));
        assert!(is_valid_id("BG2[end-users/improved-mobility]"));
        assert!(!is_valid_id("1G"));
        assert!(!is_valid_id("G 1"));
        assert!(!is_valid_id("G]"));
        assert!(!is_valid_id("G[x"));
        assert!(!is_valid_module_id("a::b"));
    }

    #[test]
    fn multiplicity_forms() {
        let m: Multiplicity = "per (beneficiary-group, benefit)".parse().unwrap();
        assert_eq!(m.params, ["beneficiary-group", "benefit"]);
        assert_eq!(m.to_string(), "per (beneficiary-group, benefit)");
        let single: Multiplicity = "per hazard".parse().unwrap();
        assert_eq!(single.to_string(), "per hazard");
        assert!("each hazard".parse::<Multiplicity>().is_err());
        assert!("per ()".parse::<Multiplicity>().is_err());
        assert!("perhazard".parse::<Multiplicity>().is_err());
    }
}
