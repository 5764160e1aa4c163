//! Distillation of autonomy rows into a coarse class.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::rating::{Level5, Rating};
use super::rows::{AutonomyRow, MatrixError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintClass {
    Minimal,
    Substantial,
    Uncertain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AutonomyClass {
    pub class: ConstraintClass,
    /// Some cell was uncertain. Never set when `class` is itself `Uncertain`.
    pub uncertain_qualifier: bool,
}

impl AutonomyClass {
    pub fn is_substantial(&self) -> bool {
        self.class == ConstraintClass::Substantial
    }

    pub fn render(&self) -> &'static str {
        match (self.class, self.uncertain_qualifier) {
            (ConstraintClass::Minimal, false) => "Minimal",
            (ConstraintClass::Minimal, true) => "Minimal, but uncertain",
            (ConstraintClass::Substantial, false) => "Substantial",
            (ConstraintClass::Substantial, true) => "Potentially substantial, but uncertain",
            (ConstraintClass::Uncertain, _) => "Uncertain",
        }
    }
}

impl fmt::Display for AutonomyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.render())
    }
}

/// Class of one autonomy row.
pub fn autonomy_class(row: &AutonomyRow) -> Result<AutonomyClass, MatrixError> {
    classify_cells(row.cells())
}

/// Ignoring `n/a`: all uncertain gives `Uncertain`; any known cell at `A lot` or
/// above gives `Substantial`; otherwise `Minimal`. The qualifier records any
/// uncertain cell.
pub fn classify_cells(
    cells: impl IntoIterator<Item = Rating<Level5>>,
) -> Result<AutonomyClass, MatrixError> {
    let mut any_cell = false;
    let mut any_uncertain = false;
    let mut worst: Option<Level5> = None;
    for cell in cells {
        match cell {
            Rating::NotApplicable => continue,
            Rating::Uncertain => any_uncertain = true,
            Rating::Known(l) => worst = worst.max(Some(l)),
        }
        any_cell = true;
    }
    if !any_cell {
        return Err(MatrixError::AllNotApplicable);
    }
    let Some(worst) = worst else {
        return Ok(AutonomyClass {
            class: ConstraintClass::Uncertain,
            uncertain_qualifier: false,
        });
    };
    let class = if worst >= Level5::ALot {
        ConstraintClass::Substantial
    } else {
        ConstraintClass::Minimal
    };
    Ok(AutonomyClass {
        class,
        uncertain_qualifier: any_uncertain,
    })
}
