//! Diagram, report and CSV outputs. Every renderer is a pure function of its inputs.

mod dot;
mod html;

use serde::{Deserialize, Serialize};

use crate::matrices::csv::{write_autonomy, write_benefits, write_risks};
use crate::model::AssuranceCase;

pub use dot::to_dot;
pub use html::to_html_report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderFormat {
    Dot,
    Html,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub format: RenderFormat,
    pub include_matrices: bool,
    pub include_flags: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            format: RenderFormat::Html,
            include_matrices: true,
            include_flags: true,
        }
    }
}

/// One CSV document per matrix, keyed by the sidecar suffix.
pub fn matrices_csv(case: &AssuranceCase) -> Vec<(&'static str, String)> {
    let m = &case.matrices;
    vec![
        ("benefits.csv", write_benefits(&m.benefits)),
        ("risks.csv", write_risks(&m.risks)),
        ("autonomy.csv", write_autonomy(&m.autonomy)),
    ]
}
