//! Canonical JSON document for a whole case.
//!
//! Object keys are sorted, node, module, edge, annotation and session arrays are
//! sorted by id, and matrix rows keep their authored order. Decoding names the
//! JSON path of the first problem it meets.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::SessionLog;
use crate::matrices::{Matrices, ResolutionAnnotation};
use crate::model::{ArgModule, AssuranceCase, CaseMeta, GsnEdge, GsnNode, ModelError};
use crate::stakeholder::StakeholderRegistry;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{path}: {message}")]
pub struct DecodeError {
    /// JSON path of the offending value, e.g. `edges[3].to`.
    pub path: String,
    pub message: String,
}

impl DecodeError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    eaa: u32,
    #[serde(default)]
    meta: CaseMeta,
    #[serde(default)]
    modules: Vec<ArgModule>,
    #[serde(default)]
    nodes: Vec<GsnNode>,
    #[serde(default)]
    edges: Vec<GsnEdge>,
    #[serde(default)]
    stakeholders: StakeholderRegistry,
    #[serde(default)]
    matrices: Matrices,
    #[serde(default)]
    annotations: Vec<ResolutionAnnotation>,
    #[serde(default)]
    sessions: Vec<SessionLog>,
}

/// Compact JSON with sorted object keys. Used for content hashes.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("model types serialize to JSON");
    serde_json::to_string(&value).expect("JSON values serialize")
}

/// Pretty-printed JSON with sorted object keys and a trailing newline.
pub fn canonical_pretty<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("model types serialize to JSON");
    let mut out = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    out.push('\n');
    out
}

pub fn encode(case: &AssuranceCase) -> String {
    let mut annotations = case.annotations.clone();
    annotations.sort_by(|a, b| a.id.cmp(&b.id));
    let mut sessions = case.sessions.clone();
    sessions.sort_by(|a, b| a.id.cmp(&b.id));
    let doc = Document {
        eaa: FORMAT_VERSION,
        meta: case.meta.clone(),
        modules: case.modules().cloned().collect(),
        nodes: case.nodes().cloned().collect(),
        edges: case.edges().cloned().collect(),
        stakeholders: case.stakeholders.clone(),
        matrices: case.matrices.clone(),
        annotations,
        sessions,
    };
    canonical_pretty(&doc)
}

/// Rebuilds a case. Node invariants and edge endpoints are enforced; edge
/// legality is left to the validator so that faulty cases can still be loaded
/// and reported on.
pub fn decode(text: &str) -> Result<AssuranceCase, DecodeError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        DecodeError::at(if path == "." { "$".to_string() } else { path }, e.into_inner().to_string())
    })?;
    if doc.eaa != FORMAT_VERSION {
        return Err(DecodeError::at(
            "eaa",
            format!("unsupported format version {}", doc.eaa),
        ));
    }
    let mut case = AssuranceCase::default();
    case.meta = doc.meta;
    case.stakeholders = doc.stakeholders;
    case.matrices = doc.matrices;
    case.annotations = doc.annotations;
    case.sessions = doc.sessions;
    for (i, m) in doc.modules.iter().enumerate() {
        case.add_module(&m.id, &m.title)
            .map_err(|e| DecodeError::at(format!("modules[{i}].id"), e.to_string()))?;
    }
    for (i, node) in doc.nodes.into_iter().enumerate() {
        case.add_node(node).map_err(|e| {
            let field = match e {
                ModelError::UnknownModule(_) => "module",
                ModelError::EvidenceOnNonSolution(_) => "evidence",
                ModelError::MissingAwayTarget(_) | ModelError::UnexpectedAwayTarget(_) => "away",
                _ => "id",
            };
            DecodeError::at(format!("nodes[{i}].{field}"), e.to_string())
        })?;
    }
    for (i, edge) in doc.edges.into_iter().enumerate() {
        for (field, id) in [("from", &edge.from), ("to", &edge.to)] {
            if case.node(id).is_none() {
                return Err(DecodeError::at(
                    format!("edges[{i}].{field}"),
                    format!("edge endpoint `{id}` does not exist"),
                ));
            }
        }
        case.insert_edge_unchecked(edge);
    }
    let mut seen = BTreeSet::new();
    for (i, a) in case.annotations.iter().enumerate() {
        if !seen.insert(a.id.as_str()) {
            return Err(DecodeError::at(
                format!("annotations[{i}].id"),
                format!("duplicate annotation id `{}`", a.id),
            ));
        }
        a.validate()
            .map_err(|e| DecodeError::at(format!("annotations[{i}]"), e.to_string()))?;
    }
    Ok(case)
}
