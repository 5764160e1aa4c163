//! Ethical assurance arguments in Goal Structuring Notation: the argument model,
//! its text format, validation, pattern instantiation, the benefit/risk/autonomy
//! matrices and the deliberation log.

pub mod canonical;
pub mod diag;
pub mod dsl;
pub mod equilibrium;
pub mod matrices;
pub mod model;
pub mod pattern;
pub mod render;
pub mod stakeholder;
pub mod storage;
pub mod validator;

pub use diag::{Diagnostic, Severity, SourceSpan, ValidationReport};
pub use model::{AssuranceCase, EdgeKind, GsnEdge, GsnNode, NodeKind};
