//! Benefit, risk and autonomy matrices, their distilled summaries, the combined
//! justice matrix and the role-combination rules.

pub mod autonomy;
pub mod csv;
pub mod justice;
pub mod rating;
pub mod rows;
pub mod summary;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use autonomy::{autonomy_class, AutonomyClass, ConstraintClass};
pub use justice::{
    check_role_combinations, combine_justice, insert_annotation, AnnotationError, AnnotationKind,
    AutonomyAssessment, AutonomyPosition, Flag, FlagRule, FlagStatus, JusticeMatrix, JusticeRow,
    ResolutionAnnotation, RoleRuleConfig,
};
pub use rating::{Level3, Level5, OrdinalScale, Rating, RatingInterval};
pub use rows::{
    AssessedRow, AutonomyRow, BenefitRow, ConstraintDimension, MatrixError, MatrixKind, Matrices,
    NewRow, RiskRow,
};
pub use summary::{check_summary, propose_summary, SummaryException, SummaryRow};

use crate::diag::Diagnostic;
use crate::stakeholder::StakeholderRegistry;

/// Everything derived from the matrices and annotations of one case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixAnalysis {
    /// Local matrix checks followed by summary coverage findings.
    pub diagnostics: Vec<Diagnostic>,
    /// Authored summaries where present, proposed hulls elsewhere.
    pub benefit_summaries: Vec<SummaryRow>,
    pub risk_summaries: Vec<SummaryRow>,
    pub autonomy: Vec<AutonomyAssessment>,
    pub justice: JusticeMatrix,
    pub flags: Vec<Flag>,
}

impl MatrixAnalysis {
    pub fn open_errors(&self) -> impl Iterator<Item = &Flag> {
        self.flags.iter().filter(|f| f.is_open_error())
    }

    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error) || self.open_errors().next().is_some()
    }
}

fn effective_summaries<R: AssessedRow>(
    rows: &[R],
    ids: &[String],
    authored: &[SummaryRow],
    registry: &StakeholderRegistry,
    diagnostics: &mut Vec<Diagnostic>,
) -> Vec<SummaryRow> {
    let mut who: BTreeSet<&str> = rows.iter().map(|r| r.stakeholder()).collect();
    for r in rows {
        let mut at = registry.get(r.stakeholder()).and_then(|s| s.parent.as_deref());
        while let Some(parent) = at {
            who.insert(parent);
            at = registry.get(parent).and_then(|s| s.parent.as_deref());
        }
    }
    for s in authored {
        if !who.contains(s.stakeholder.as_str()) {
            diagnostics.push(
                Diagnostic::error(
                    "E-SUMMARY-NO-ROWS",
                    format!("{} summary for `{}` has no detailed rows", R::MATRIX, s.stakeholder),
                )
                .with_subject(s.stakeholder.as_str()),
            );
        }
    }
    let mut out = Vec::new();
    for stakeholder in who {
        let scoped = Matrices::rows_for(rows, ids, stakeholder, registry);
        match authored.iter().find(|s| s.stakeholder == stakeholder) {
            Some(summary) => {
                diagnostics.extend(check_summary(&scoped, summary));
                out.push(summary.clone());
            }
            None => {
                if let Ok(summary) = propose_summary(stakeholder, &scoped) {
                    out.push(summary);
                }
            }
        }
    }
    out
}

/// Runs every matrix check and computes the justice matrix and its flags.
pub fn analyze(
    registry: &StakeholderRegistry,
    matrices: &Matrices,
    annotations: &[ResolutionAnnotation],
) -> MatrixAnalysis {
    let mut diagnostics = matrices.validate(registry);
    let benefit_summaries = effective_summaries(
        &matrices.benefits,
        &matrices.row_ids(MatrixKind::Benefits),
        &matrices.benefit_summaries,
        registry,
        &mut diagnostics,
    );
    let risk_summaries = effective_summaries(
        &matrices.risks,
        &matrices.row_ids(MatrixKind::Risks),
        &matrices.risk_summaries,
        registry,
        &mut diagnostics,
    );
    let mut autonomy = Vec::new();
    for row in &matrices.autonomy {
        if let Ok(class) = autonomy_class(row) {
            if autonomy.iter().any(|a: &AutonomyAssessment| a.stakeholder == row.group) {
                continue;
            }
            autonomy.push(AutonomyAssessment {
                stakeholder: row.group.clone(),
                class,
                no_consent: row.no_consent,
            });
        }
    }
    for a in annotations {
        if !registry.contains(&a.stakeholder) {
            diagnostics.push(
                Diagnostic::error(
                    "E-ANNOTATION-STAKEHOLDER",
                    format!("annotation `{}` names unregistered stakeholder `{}`", a.id, a.stakeholder),
                )
                .with_subject(a.id.as_str()),
            );
        }
        if let Err(e) = a.validate() {
            diagnostics.push(Diagnostic::error("E-ANNOTATION", e.to_string()).with_subject(a.id.as_str()));
        }
    }
    let justice = combine_justice(&benefit_summaries, &risk_summaries, &autonomy);
    let flags = check_role_combinations(&justice, annotations, &matrices.rules);
    MatrixAnalysis {
        diagnostics,
        benefit_summaries,
        risk_summaries,
        autonomy,
        justice,
        flags,
    }
}
