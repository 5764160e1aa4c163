//! Distilled summaries of the benefit and risk matrices, and the check that a
//! summary faithfully covers the rows it distils.

use serde::{Deserialize, Serialize};

use super::rating::{Level3, RatingInterval};
use super::rows::{AssessedRow, MatrixError};
use crate::diag::Diagnostic;

/// A detailed row deliberately left out of a summary, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SummaryException {
    pub row: String,
    pub reason: String,
}

/// One stakeholder's distilled position. `magnitude` is impact for benefits and
/// severity for risks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SummaryRow {
    pub stakeholder: String,
    pub likelihood: RatingInterval<Level3>,
    pub magnitude: RatingInterval<Level3>,
    pub confidence: RatingInterval<Level3>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exceptions: Vec<SummaryException>,
}

impl SummaryRow {
    pub fn axes(&self) -> [&RatingInterval<Level3>; 3] {
        [&self.likelihood, &self.magnitude, &self.confidence]
    }

    pub fn is_empty(&self) -> bool {
        self.axes().iter().all(|a| a.is_empty())
    }

    pub fn is_excepted(&self, row_id: &str) -> bool {
        self.exceptions.iter().any(|e| e.row == row_id)
    }

    /// e.g. "Medium to high likelihood of medium to high impact benefits". An
    /// axis with known levels and uncertainty reads "Uncertain to medium".
    pub fn describe(&self, magnitude_word: &str, noun: &str) -> String {
        let phrase = |axis: &RatingInterval<Level3>| match (axis.bounds(), axis.is_uncertain()) {
            (Some(_), true) => {
                format!("Uncertain to {}", axis.with_uncertain(false).render().to_ascii_lowercase())
            }
            _ => axis.render(),
        };
        let lower_first = |s: String| {
            let mut c = s.chars();
            match c.next() {
                Some(f) => f.to_lowercase().collect::<String>() + c.as_str(),
                None => s,
            }
        };
        format!(
            "{} likelihood of {} {magnitude_word} {noun}",
            phrase(&self.likelihood),
            lower_first(phrase(&self.magnitude))
        )
    }
}

/// Axis-wise hull of the rows. Always passes [`check_summary`] against the same rows.
pub fn propose_summary<R: AssessedRow>(
    stakeholder: &str,
    rows: &[(&str, &R)],
) -> Result<SummaryRow, MatrixError> {
    if rows.is_empty() {
        return Err(MatrixError::EmptyRows);
    }
    let axis = |i: usize| RatingInterval::hull(rows.iter().map(|(_, r)| r.axes()[i]));
    Ok(SummaryRow {
        stakeholder: stakeholder.to_string(),
        likelihood: axis(0),
        magnitude: axis(1),
        confidence: axis(2),
        exceptions: Vec::new(),
    })
}

/// Every non-excepted row's every axis value must be covered by the summary.
/// Codes: `E-SUMMARY-<AXIS>` per uncovered (row, axis), `E-SUMMARY-EXCEPTION-ROW`
/// for exceptions naming rows outside `rows`, `E-SUMMARY-EXCEPTION-REASON` for
/// exceptions without a reason.
pub fn check_summary<R: AssessedRow>(rows: &[(&str, &R)], summary: &SummaryRow) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for exception in &summary.exceptions {
        if !rows.iter().any(|(id, _)| *id == exception.row) {
            out.push(
                Diagnostic::error(
                    "E-SUMMARY-EXCEPTION-ROW",
                    format!(
                        "summary for `{}` excepts unknown row `{}`",
                        summary.stakeholder, exception.row
                    ),
                )
                .with_subject(exception.row.as_str()),
            );
        }
        if exception.reason.trim().is_empty() {
            out.push(
                Diagnostic::error(
                    "E-SUMMARY-EXCEPTION-REASON",
                    format!("exception for `{}` gives no reason", exception.row),
                )
                .with_subject(exception.row.as_str()),
            );
        }
    }
    for (id, row) in rows {
        if summary.is_excepted(id) {
            continue;
        }
        for ((axis, value), interval) in R::AXES.iter().zip(row.axes()).zip(summary.axes()) {
            if !interval.covers(value) {
                out.push(
                    Diagnostic::error(
                        &format!("E-SUMMARY-{}", axis.to_ascii_uppercase()),
                        format!(
                            "{axis} `{}` of row `{id}` is not covered by the summary for `{}` ({})",
                            value.label(),
                            summary.stakeholder,
                            interval.render()
                        ),
                    )
                    .with_subject(*id),
                );
            }
        }
    }
    out
}
