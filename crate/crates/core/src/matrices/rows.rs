//! Detailed matrix rows and the per-case matrix set.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rating::{Level3, Level5, Rating, RatingParseError};
use super::summary::SummaryRow;
use super::RoleRuleConfig;
use crate::diag::Diagnostic;
use crate::stakeholder::StakeholderRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Benefits,
    Risks,
    Autonomy,
}

impl MatrixKind {
    pub const ALL: [MatrixKind; 3] = [MatrixKind::Benefits, MatrixKind::Risks, MatrixKind::Autonomy];

    pub fn as_str(self) -> &'static str {
        match self {
            MatrixKind::Benefits => "benefits",
            MatrixKind::Risks => "risks",
            MatrixKind::Autonomy => "autonomy",
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MatrixKind {
    type Err = MatrixError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| MatrixError::UnknownMatrix(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("unknown matrix `{0}`")]
    UnknownMatrix(String),
    #[error("no {0} row with id `{1}`")]
    UnknownRow(MatrixKind, String),
    #[error("{0} rows have no field `{1}`")]
    UnknownField(MatrixKind, String),
    #[error(transparent)]
    Rating(#[from] RatingParseError),
    #[error("n/a is not allowed on the {0} matrix")]
    NotApplicableOnScale3(MatrixKind),
    #[error("a summary needs at least one detailed row")]
    EmptyRows,
    #[error("every autonomy cell is n/a")]
    AllNotApplicable,
    #[error("field `{0}` must not be empty")]
    EmptyField(&'static str),
    #[error("unregistered stakeholder `{0}`")]
    UnknownStakeholder(String),
    #[error("{0} row `{1}` already exists")]
    DuplicateRow(MatrixKind, String),
}

/// Shared shape of benefit and risk rows: a stakeholder, a kind, and three scale-3 axes.
pub trait AssessedRow {
    const MATRIX: MatrixKind;
    /// Axis names in column order.
    const AXES: [&'static str; 3];

    fn stakeholder(&self) -> &str;
    fn kind(&self) -> &str;
    fn axes(&self) -> [Rating<Level3>; 3];
    fn axes_mut(&mut self) -> [&mut Rating<Level3>; 3];
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BenefitRow {
    pub beneficiary: String,
    pub kind: String,
    pub likelihood: Rating<Level3>,
    pub impact: Rating<Level3>,
    /// Confidence the benefit continues over the lifetime of use.
    pub confidence: Rating<Level3>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RiskRow {
    pub risk_bearer: String,
    pub kind: String,
    pub likelihood: Rating<Level3>,
    pub severity: Rating<Level3>,
    /// Confidence the hazard stays controlled over the lifetime of use.
    pub confidence: Rating<Level3>,
}

impl BenefitRow {
    pub fn new(beneficiary: &str, kind: &str, ratings: [Rating<Level3>; 3]) -> Self {
        let [likelihood, impact, confidence] = ratings;
        Self {
            beneficiary: beneficiary.to_string(),
            kind: kind.to_string(),
            likelihood,
            impact,
            confidence,
        }
    }
}

impl RiskRow {
    pub fn new(risk_bearer: &str, kind: &str, ratings: [Rating<Level3>; 3]) -> Self {
        let [likelihood, severity, confidence] = ratings;
        Self {
            risk_bearer: risk_bearer.to_string(),
            kind: kind.to_string(),
            likelihood,
            severity,
            confidence,
        }
    }
}

impl AssessedRow for BenefitRow {
    const MATRIX: MatrixKind = MatrixKind::Benefits;
    const AXES: [&'static str; 3] = ["likelihood", "impact", "confidence"];

    fn stakeholder(&self) -> &str {
        &self.beneficiary
    }
    fn kind(&self) -> &str {
        &self.kind
    }
    fn axes(&self) -> [Rating<Level3>; 3] {
        [self.likelihood, self.impact, self.confidence]
    }
    fn axes_mut(&mut self) -> [&mut Rating<Level3>; 3] {
        [&mut self.likelihood, &mut self.impact, &mut self.confidence]
    }
}

impl AssessedRow for RiskRow {
    const MATRIX: MatrixKind = MatrixKind::Risks;
    const AXES: [&'static str; 3] = ["likelihood", "severity", "confidence"];

    fn stakeholder(&self) -> &str {
        &self.risk_bearer
    }
    fn kind(&self) -> &str {
        &self.kind
    }
    fn axes(&self) -> [Rating<Level3>; 3] {
        [self.likelihood, self.severity, self.confidence]
    }
    fn axes_mut(&mut self) -> [&mut Rating<Level3>; 3] {
        [&mut self.likelihood, &mut self.severity, &mut self.confidence]
    }
}

/// The five ways use of a system can constrain autonomy. The last three are
/// phrased as double negatives: a high rating means control or consent is lacking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintDimension {
    Coerces,
    Deceives,
    NotReasonsResponsive,
    NoConsent,
    NoPhysicalControl,
}

impl ConstraintDimension {
    pub const ALL: [ConstraintDimension; 5] = [
        ConstraintDimension::Coerces,
        ConstraintDimension::Deceives,
        ConstraintDimension::NotReasonsResponsive,
        ConstraintDimension::NoConsent,
        ConstraintDimension::NoPhysicalControl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintDimension::Coerces => "coerces",
            ConstraintDimension::Deceives => "deceives",
            ConstraintDimension::NotReasonsResponsive => "not_reasons_responsive",
            ConstraintDimension::NoConsent => "no_consent",
            ConstraintDimension::NoPhysicalControl => "no_physical_control",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            ConstraintDimension::Coerces => "use of the system coerces",
            ConstraintDimension::Deceives => "use of the system deceives",
            ConstraintDimension::NotReasonsResponsive => "the system is not reasons-responsive",
            ConstraintDimension::NoConsent => "informed consent cannot be given",
            ConstraintDimension::NoPhysicalControl => "physical control cannot be exercised",
        }
    }

    pub fn from_word(word: &str) -> Option<Self> {
        let w = word.replace('-', "_");
        Self::ALL.into_iter().find(|d| d.as_str() == w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AutonomyRow {
    pub group: String,
    pub coerces: Rating<Level5>,
    pub deceives: Rating<Level5>,
    pub not_reasons_responsive: Rating<Level5>,
    pub no_consent: Rating<Level5>,
    pub no_physical_control: Rating<Level5>,
}

impl AutonomyRow {
    pub fn new(group: &str, cells: [Rating<Level5>; 5]) -> Self {
        let [coerces, deceives, not_reasons_responsive, no_consent, no_physical_control] = cells;
        Self {
            group: group.to_string(),
            coerces,
            deceives,
            not_reasons_responsive,
            no_consent,
            no_physical_control,
        }
    }

    pub fn cells(&self) -> [Rating<Level5>; 5] {
        [
            self.coerces,
            self.deceives,
            self.not_reasons_responsive,
            self.no_consent,
            self.no_physical_control,
        ]
    }

    pub fn cell(&self, dim: ConstraintDimension) -> Rating<Level5> {
        self.cells()[dim as usize]
    }

    pub fn cell_mut(&mut self, dim: ConstraintDimension) -> &mut Rating<Level5> {
        match dim {
            ConstraintDimension::Coerces => &mut self.coerces,
            ConstraintDimension::Deceives => &mut self.deceives,
            ConstraintDimension::NotReasonsResponsive => &mut self.not_reasons_responsive,
            ConstraintDimension::NoConsent => &mut self.no_consent,
            ConstraintDimension::NoPhysicalControl => &mut self.no_physical_control,
        }
    }
}

/// Lowercase, dash-separated form of free text, used in row and instance ids.
pub fn slug(text: &str) -> String {
    let mut out = String::new();
    for c in text.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        out.push_str("row");
    }
    out
}

/// Stable ids for a table: `stakeholder/kind-slug`, with `-2`, `-3` … appended to repeats.
pub fn row_ids<'a>(keys: impl IntoIterator<Item = (&'a str, Option<&'a str>)>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    keys.into_iter()
        .map(|(stakeholder, kind)| {
            let base = match kind {
                Some(k) => format!("{stakeholder}/{}", slug(k)),
                None => stakeholder.to_string(),
            };
            let mut id = base.clone();
            let mut n = 1;
            while !seen.insert(id.clone()) {
                n += 1;
                id = format!("{base}-{n}");
            }
            id
        })
        .collect()
}

/// A row to append, tagged with its matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "matrix", rename_all = "snake_case")]
pub enum NewRow {
    Benefits(BenefitRow),
    Risks(RiskRow),
    Autonomy(AutonomyRow),
}

impl NewRow {
    pub fn kind(&self) -> MatrixKind {
        match self {
            NewRow::Benefits(_) => MatrixKind::Benefits,
            NewRow::Risks(_) => MatrixKind::Risks,
            NewRow::Autonomy(_) => MatrixKind::Autonomy,
        }
    }

    pub fn stakeholder(&self) -> &str {
        match self {
            NewRow::Benefits(r) => &r.beneficiary,
            NewRow::Risks(r) => &r.risk_bearer,
            NewRow::Autonomy(r) => &r.group,
        }
    }
}

/// Detailed matrices, the distilled summaries authored for them, and rule settings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrices {
    #[serde(default)]
    pub benefits: Vec<BenefitRow>,
    #[serde(default)]
    pub risks: Vec<RiskRow>,
    #[serde(default)]
    pub autonomy: Vec<AutonomyRow>,
    #[serde(default)]
    pub benefit_summaries: Vec<SummaryRow>,
    #[serde(default)]
    pub risk_summaries: Vec<SummaryRow>,
    #[serde(default)]
    pub rules: RoleRuleConfig,
}

impl Matrices {
    pub fn is_empty(&self) -> bool {
        self.benefits.is_empty() && self.risks.is_empty() && self.autonomy.is_empty()
    }

    pub fn row_ids(&self, kind: MatrixKind) -> Vec<String> {
        match kind {
            MatrixKind::Benefits => {
                row_ids(self.benefits.iter().map(|r| (r.stakeholder(), Some(r.kind()))))
            }
            MatrixKind::Risks => row_ids(self.risks.iter().map(|r| (r.stakeholder(), Some(r.kind())))),
            MatrixKind::Autonomy => row_ids(self.autonomy.iter().map(|r| (r.group.as_str(), None))),
        }
    }

    pub fn row_count(&self, kind: MatrixKind) -> usize {
        match kind {
            MatrixKind::Benefits => self.benefits.len(),
            MatrixKind::Risks => self.risks.len(),
            MatrixKind::Autonomy => self.autonomy.len(),
        }
    }

    fn position(&self, kind: MatrixKind, row_id: &str) -> Result<usize, MatrixError> {
        self.row_ids(kind)
            .iter()
            .position(|id| id == row_id)
            .ok_or_else(|| MatrixError::UnknownRow(kind, row_id.to_string()))
    }

    /// Sets one rating cell. Fields are the CSV column names.
    pub fn set_cell(
        &mut self,
        kind: MatrixKind,
        row_id: &str,
        field: &str,
        value: &str,
    ) -> Result<(), MatrixError> {
        let at = self.position(kind, row_id)?;
        match kind {
            MatrixKind::Benefits => set_assessed(&mut self.benefits[at], field, value),
            MatrixKind::Risks => set_assessed(&mut self.risks[at], field, value),
            MatrixKind::Autonomy => {
                let dim = ConstraintDimension::from_word(field)
                    .ok_or_else(|| MatrixError::UnknownField(kind, field.to_string()))?;
                *self.autonomy[at].cell_mut(dim) = Rating::parse(value)?;
                Ok(())
            }
        }
    }

    /// Appends a row after checking its stakeholder and scale, returning the new row id.
    pub fn add_row(&mut self, row: NewRow, registry: &StakeholderRegistry) -> Result<String, MatrixError> {
        let kind = row.kind();
        if !registry.contains(row.stakeholder()) {
            return Err(MatrixError::UnknownStakeholder(row.stakeholder().to_string()));
        }
        fn check3<R: AssessedRow>(r: &R) -> Result<(), MatrixError> {
            if r.kind().trim().is_empty() {
                return Err(MatrixError::EmptyField("kind"));
            }
            if r.axes().contains(&Rating::NotApplicable) {
                return Err(MatrixError::NotApplicableOnScale3(R::MATRIX));
            }
            Ok(())
        }
        match row {
            NewRow::Benefits(r) => {
                check3(&r)?;
                self.benefits.push(r);
            }
            NewRow::Risks(r) => {
                check3(&r)?;
                self.risks.push(r);
            }
            NewRow::Autonomy(r) => {
                if self.autonomy.iter().any(|a| a.group == r.group) {
                    return Err(MatrixError::DuplicateRow(kind, r.group));
                }
                if r.cells().iter().all(|c| *c == Rating::NotApplicable) {
                    return Err(MatrixError::AllNotApplicable);
                }
                self.autonomy.push(r);
            }
        }
        Ok(self.row_ids(kind).pop().expect("row was just added"))
    }

    /// Rows of `kind` belonging to `stakeholder` or any of its sub-groups, with their ids.
    pub fn rows_for<'a, R: AssessedRow>(
        rows: &'a [R],
        ids: &'a [String],
        stakeholder: &str,
        registry: &StakeholderRegistry,
    ) -> Vec<(&'a str, &'a R)> {
        ids.iter()
            .zip(rows)
            .filter(|(_, r)| registry.is_within(r.stakeholder(), stakeholder))
            .map(|(id, r)| (id.as_str(), r))
            .collect()
    }

    /// Local consistency: known stakeholders, scale-3 cells never `n/a`, autonomy
    /// risk-bearers drawn from the risk-bearers, one summary per stakeholder.
    pub fn validate(&self, registry: &StakeholderRegistry) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut unknown = |who: &str, ctx: &str| {
            if !registry.contains(who) {
                out.push(
                    Diagnostic::error(
                        "E-MATRIX-STAKEHOLDER",
                        format!("{ctx} names unregistered stakeholder `{who}`"),
                    )
                    .with_subject(who),
                );
            }
        };
        for r in &self.benefits {
            unknown(&r.beneficiary, "benefit row");
        }
        for r in &self.risks {
            unknown(&r.risk_bearer, "risk row");
        }
        for r in &self.autonomy {
            unknown(&r.group, "autonomy row");
        }
        for s in self.benefit_summaries.iter().chain(&self.risk_summaries) {
            unknown(&s.stakeholder, "summary");
        }
        out.extend(scale3_checks(&self.benefits, &self.row_ids(MatrixKind::Benefits)));
        out.extend(scale3_checks(&self.risks, &self.row_ids(MatrixKind::Risks)));
        for (id, r) in self.row_ids(MatrixKind::Autonomy).iter().zip(&self.autonomy) {
            if !self.risks.iter().any(|risk| risk.risk_bearer == r.group) {
                out.push(
                    Diagnostic::error(
                        "E-AUTONOMY-SUBSET",
                        format!("autonomy risk-bearer `{}` bears no listed risk", r.group),
                    )
                    .with_subject(id.as_str()),
                );
            }
            if r.cells().iter().all(|c| *c == Rating::NotApplicable) {
                out.push(
                    Diagnostic::error("E-AUTONOMY-EMPTY", "every autonomy cell is n/a")
                        .with_subject(id.as_str()),
                );
            }
        }
        for (label, summaries) in [("benefit", &self.benefit_summaries), ("risk", &self.risk_summaries)] {
            let mut seen = BTreeSet::new();
            for s in summaries {
                if !seen.insert(&s.stakeholder) {
                    out.push(
                        Diagnostic::error(
                            "E-SUMMARY-DUPLICATE",
                            format!("more than one {label} summary for `{}`", s.stakeholder),
                        )
                        .with_subject(s.stakeholder.as_str()),
                    );
                }
            }
        }
        out
    }
}

fn set_assessed<R: AssessedRow>(row: &mut R, field: &str, value: &str) -> Result<(), MatrixError> {
    let axis = R::AXES
        .iter()
        .position(|a| *a == field)
        .ok_or_else(|| MatrixError::UnknownField(R::MATRIX, field.to_string()))?;
    let rating = Rating::<Level3>::parse(value)?;
    if rating == Rating::NotApplicable {
        return Err(MatrixError::NotApplicableOnScale3(R::MATRIX));
    }
    *row.axes_mut()[axis] = rating;
    Ok(())
}

fn scale3_checks<R: AssessedRow>(rows: &[R], ids: &[String]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (id, row) in ids.iter().zip(rows) {
        for (axis, rating) in R::AXES.iter().zip(row.axes()) {
            if rating == Rating::NotApplicable {
                out.push(
                    Diagnostic::error(
                        "E-MATRIX-SCALE",
                        format!("{axis} is n/a, which the {} matrix does not allow", R::MATRIX),
                    )
                    .with_subject(id.as_str()),
                );
            }
        }
        if row.kind().trim().is_empty() {
            out.push(Diagnostic::error("E-MATRIX-KIND", "row has no kind").with_subject(id.as_str()));
        }
    }
    out
}
