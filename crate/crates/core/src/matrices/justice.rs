//! The combined benefit/risk/autonomy view per stakeholder and the problematic
//! role-combination rules evaluated over it.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::autonomy::AutonomyClass;
use super::rating::{Level3, Level5, Rating};
use super::summary::SummaryRow;
use crate::diag::Severity;

/// Autonomy position of one stakeholder as carried into the justice matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AutonomyPosition {
    /// Not an autonomy risk-bearer.
    NotApplicable,
    Assessed {
        class: AutonomyClass,
        /// Worst rating for "informed consent cannot be given".
        no_consent: Rating<Level5>,
    },
}

impl AutonomyPosition {
    pub fn render(&self) -> &'static str {
        match self {
            AutonomyPosition::NotApplicable => "n/a",
            AutonomyPosition::Assessed { class, .. } => class.render(),
        }
    }

    pub fn class(&self) -> Option<AutonomyClass> {
        match self {
            AutonomyPosition::Assessed { class, .. } => Some(*class),
            AutonomyPosition::NotApplicable => None,
        }
    }
}

/// Autonomy class of one stakeholder, the input side of [`combine_justice`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutonomyAssessment {
    pub stakeholder: String,
    pub class: AutonomyClass,
    pub no_consent: Rating<Level5>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JusticeRow {
    pub stakeholder: String,
    pub benefit: Option<SummaryRow>,
    pub risk: Option<SummaryRow>,
    pub autonomy: AutonomyPosition,
}

impl JusticeRow {
    pub fn has_benefit(&self) -> bool {
        self.benefit.as_ref().is_some_and(|b| !b.is_empty())
    }

    pub fn has_risk(&self) -> bool {
        self.risk.as_ref().is_some_and(|r| !r.is_empty())
    }
}

/// Rows sorted by stakeholder id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JusticeMatrix {
    pub rows: Vec<JusticeRow>,
}

impl JusticeMatrix {
    pub fn row(&self, stakeholder: &str) -> Option<&JusticeRow> {
        self.rows.iter().find(|r| r.stakeholder == stakeholder)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Outer join of the three distilled views on stakeholder id.
pub fn combine_justice(
    benefits: &[SummaryRow],
    risks: &[SummaryRow],
    autonomy: &[AutonomyAssessment],
) -> JusticeMatrix {
    let mut rows: BTreeMap<&str, JusticeRow> = BTreeMap::new();
    let entry = |id: &str| -> JusticeRow {
        JusticeRow {
            stakeholder: id.to_string(),
            benefit: None,
            risk: None,
            autonomy: AutonomyPosition::NotApplicable,
        }
    };
    for b in benefits {
        rows.entry(&b.stakeholder)
            .or_insert_with(|| entry(&b.stakeholder))
            .benefit = Some(b.clone());
    }
    for r in risks {
        rows.entry(&r.stakeholder)
            .or_insert_with(|| entry(&r.stakeholder))
            .risk = Some(r.clone());
    }
    for a in autonomy {
        rows.entry(&a.stakeholder)
            .or_insert_with(|| entry(&a.stakeholder))
            .autonomy = AutonomyPosition::Assessed {
            class: a.class,
            no_consent: a.no_consent,
        };
    }
    JusticeMatrix {
        rows: rows.into_values().collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnotationKind {
    Compensation,
    Mitigation,
    ConsentByProxy,
    EntrenchmentReview,
}

impl AnnotationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnnotationKind::Compensation => "compensation",
            AnnotationKind::Mitigation => "mitigation",
            AnnotationKind::ConsentByProxy => "consent-by-proxy",
            AnnotationKind::EntrenchmentReview => "entrenchment-review",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnnotationError {
    #[error("annotation `{0}` has no rationale")]
    EmptyRationale(String),
    #[error("annotation id must not be empty")]
    EmptyId,
    #[error("duplicate annotation id `{0}`")]
    Duplicate(String),
}

/// A recorded human decision that addresses a flag for one stakeholder.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResolutionAnnotation {
    pub id: String,
    pub kind: AnnotationKind,
    pub stakeholder: String,
    pub rationale: String,
    pub author: String,
}

impl ResolutionAnnotation {
    pub fn new(
        id: &str,
        kind: AnnotationKind,
        stakeholder: &str,
        rationale: &str,
        author: &str,
    ) -> Result<Self, AnnotationError> {
        let a = Self {
            id: id.to_string(),
            kind,
            stakeholder: stakeholder.to_string(),
            rationale: rationale.to_string(),
            author: author.to_string(),
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<(), AnnotationError> {
        if self.id.trim().is_empty() {
            return Err(AnnotationError::EmptyId);
        }
        if self.rationale.trim().is_empty() {
            return Err(AnnotationError::EmptyRationale(self.id.clone()));
        }
        Ok(())
    }
}

/// Adds an annotation to a list kept sorted by id.
pub fn insert_annotation(
    list: &mut Vec<ResolutionAnnotation>,
    annotation: ResolutionAnnotation,
) -> Result<(), AnnotationError> {
    annotation.validate()?;
    match list.binary_search_by(|a| a.id.cmp(&annotation.id)) {
        Ok(_) => Err(AnnotationError::Duplicate(annotation.id)),
        Err(at) => {
            list.insert(at, annotation);
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FlagRule {
    #[serde(rename = "R1-only-risk")]
    OnlyRisk,
    #[serde(rename = "R2-uncompensated")]
    Uncompensated,
    #[serde(rename = "R3-undue-autonomy")]
    UndueAutonomy,
    #[serde(rename = "R4-benefit-imposed")]
    BenefitImposed,
    #[serde(rename = "R5-entrenchment-unreviewed")]
    EntrenchmentUnreviewed,
}

impl FlagRule {
    pub fn code(self) -> &'static str {
        match self {
            FlagRule::OnlyRisk => "R1-only-risk",
            FlagRule::Uncompensated => "R2-uncompensated",
            FlagRule::UndueAutonomy => "R3-undue-autonomy",
            FlagRule::BenefitImposed => "R4-benefit-imposed",
            FlagRule::EntrenchmentUnreviewed => "R5-entrenchment-unreviewed",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            FlagRule::OnlyRisk | FlagRule::EntrenchmentUnreviewed => Severity::Error,
            _ => Severity::Warning,
        }
    }

    /// Annotation kinds that resolve this rule.
    pub fn resolved_by(self) -> &'static [AnnotationKind] {
        match self {
            FlagRule::OnlyRisk | FlagRule::Uncompensated => &[AnnotationKind::Compensation],
            FlagRule::UndueAutonomy => &[AnnotationKind::Mitigation, AnnotationKind::ConsentByProxy],
            FlagRule::BenefitImposed => &[AnnotationKind::ConsentByProxy],
            FlagRule::EntrenchmentUnreviewed => &[AnnotationKind::EntrenchmentReview],
        }
    }
}

impl fmt::Display for FlagRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagStatus {
    Open,
    Resolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flag {
    pub rule: FlagRule,
    pub stakeholder: String,
    pub severity: Severity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_by: Option<String>,
    pub status: FlagStatus,
    pub message: String,
}

impl Flag {
    pub fn is_open_error(&self) -> bool {
        self.status == FlagStatus::Open && self.severity == Severity::Error
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}: {} [{}",
            self.rule,
            self.severity,
            self.stakeholder,
            self.message,
            match self.status {
                FlagStatus::Open => "open",
                FlagStatus::Resolved => "resolved",
            }
        )?;
        if let Some(by) = &self.resolved_by {
            write!(f, " by {by}")?;
        }
        f.write_str("]")
    }
}

/// Thresholds for the rules that need one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleRuleConfig {
    /// A benefit position counts as minimal when its likelihood or its impact
    /// never exceeds this level.
    pub minimal_benefit_max: Level3,
}

impl Default for RoleRuleConfig {
    fn default() -> Self {
        Self {
            minimal_benefit_max: Level3::Low,
        }
    }
}

fn benefit_is_minimal(benefit: &SummaryRow, config: &RoleRuleConfig) -> bool {
    let capped = |axis: &super::rating::RatingInterval<Level3>| {
        !axis.is_uncertain() && axis.hi().is_some_and(|hi| hi <= config.minimal_benefit_max)
    };
    capped(&benefit.likelihood) || capped(&benefit.magnitude)
}

/// Evaluates the five role-combination rules for every stakeholder. Flags whose
/// rule is addressed by an annotation for the same stakeholder are kept and
/// marked resolved. Output is sorted by rule, then stakeholder.
pub fn check_role_combinations(
    matrix: &JusticeMatrix,
    annotations: &[ResolutionAnnotation],
    config: &RoleRuleConfig,
) -> Vec<Flag> {
    let mut flags = Vec::new();
    let mut raise = |rule: FlagRule, who: &str, message: String| {
        let resolver = annotations
            .iter()
            .filter(|a| a.stakeholder == who && rule.resolved_by().contains(&a.kind))
            .map(|a| a.id.clone())
            .min();
        flags.push(Flag {
            rule,
            stakeholder: who.to_string(),
            severity: rule.severity(),
            status: if resolver.is_some() {
                FlagStatus::Resolved
            } else {
                FlagStatus::Open
            },
            resolved_by: resolver,
            message,
        });
    };
    for row in &matrix.rows {
        let who = row.stakeholder.as_str();
        let substantial = row.autonomy.class().is_some_and(|c| c.is_substantial());
        if row.has_risk() && !row.has_benefit() {
            raise(FlagRule::OnlyRisk, who, "bears risk with no benefit".to_string());
        }
        if row.has_risk() {
            if let Some(benefit) = row.benefit.as_ref().filter(|_| row.has_benefit()) {
                if benefit_is_minimal(benefit, config) {
                    raise(
                        FlagRule::Uncompensated,
                        who,
                        "bears risk for only minimal benefit".to_string(),
                    );
                }
            }
        }
        if substantial {
            raise(
                FlagRule::UndueAutonomy,
                who,
                format!("constraint on autonomy is {}", row.autonomy.render().to_lowercase()),
            );
        }
        if let AutonomyPosition::Assessed { class, no_consent } = row.autonomy {
            let consent_lacking = no_consent.known().is_some_and(|l| l >= Level5::ALittle);
            if row.has_benefit() && class.is_substantial() && consent_lacking {
                raise(
                    FlagRule::BenefitImposed,
                    who,
                    format!(
                        "benefits may be imposed without consent (consent cannot be given: {})",
                        no_consent.label().to_lowercase()
                    ),
                );
            }
        }
        raise(
            FlagRule::EntrenchmentUnreviewed,
            who,
            "no review of whether the distribution entrenches existing inequalities".to_string(),
        );
    }
    flags.sort_by(|a, b| (a.rule, &a.stakeholder).cmp(&(b.rule, &b.stakeholder)));
    flags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::autonomy::ConstraintClass;
    use crate::matrices::rating::RatingInterval;

    fn summary(who: &str, l: Level3, m: Level3) -> SummaryRow {
        SummaryRow {
            stakeholder: who.into(),
            likelihood: RatingInterval::point(l),
            magnitude: RatingInterval::point(m),
            confidence: RatingInterval::point(Level3::Medium),
            exceptions: vec![],
        }
    }

    fn reviewed(who: &str) -> ResolutionAnnotation {
        ResolutionAnnotation::new(&format!("rev-{who}"), AnnotationKind::EntrenchmentReview, who, "ok", "e")
            .unwrap()
    }

    #[test]
    fn outer_join() {
        let m = combine_justice(
            &[summary("a", Level3::High, Level3::High)],
            &[summary("b", Level3::Low, Level3::Low)],
            &[],
        );
        assert_eq!(m.len(), 2);
        assert!(m.row("b").unwrap().benefit.is_none());
        assert_eq!(m.row("a").unwrap().autonomy, AutonomyPosition::NotApplicable);
        assert!(combine_justice(&[], &[], &[]).is_empty());
    }

    #[test]
    fn only_risk_raises_r1_until_compensated() {
        let m = combine_justice(&[], &[summary("b", Level3::High, Level3::High)], &[]);
        let flags = check_role_combinations(&m, &[reviewed("b")], &RoleRuleConfig::default());
        assert_eq!(flags.len(), 2);
        assert_eq!(flags[0].rule, FlagRule::OnlyRisk);
        assert!(flags[0].is_open_error());
        let comp = ResolutionAnnotation::new("c1", AnnotationKind::Compensation, "b", "paid", "p").unwrap();
        let flags = check_role_combinations(&m, &[comp, reviewed("b")], &RoleRuleConfig::default());
        assert!(flags.iter().all(|f| f.status == FlagStatus::Resolved));
        assert_eq!(flags[0].resolved_by.as_deref(), Some("c1"));
    }

    #[test]
    fn minimal_benefit_raises_r2() {
        let m = combine_justice(
            &[summary("a", Level3::Low, Level3::High)],
            &[summary("a", Level3::Low, Level3::Low)],
            &[],
        );
        let rules: Vec<FlagRule> = check_role_combinations(&m, &[], &RoleRuleConfig::default())
            .into_iter()
            .map(|f| f.rule)
            .collect();
        assert_eq!(rules, [FlagRule::Uncompensated, FlagRule::EntrenchmentUnreviewed]);
        let m2 = combine_justice(
            &[summary("a", Level3::Medium, Level3::Medium)],
            &[summary("a", Level3::Low, Level3::Low)],
            &[],
        );
        let has_r2 = |cfg: RoleRuleConfig| {
            check_role_combinations(&m2, &[], &cfg)
                .iter()
                .any(|f| f.rule == FlagRule::Uncompensated)
        };
        assert!(!has_r2(RoleRuleConfig::default()));
        assert!(has_r2(RoleRuleConfig { minimal_benefit_max: Level3::Medium }));
    }

    #[test]
    fn substantial_autonomy_with_consent_gap_raises_r3_and_r4() {
        let class = AutonomyClass { class: ConstraintClass::Substantial, uncertain_qualifier: true };
        let m = combine_justice(
            &[summary("a", Level3::High, Level3::High)],
            &[summary("a", Level3::Low, Level3::High)],
            &[AutonomyAssessment {
                stakeholder: "a".into(),
                class,
                no_consent: Rating::Known(Level5::ALittle),
            }],
        );
        let flags = check_role_combinations(&m, &[reviewed("a")], &RoleRuleConfig::default());
        let open: Vec<FlagRule> = flags
            .iter()
            .filter(|f| f.status == FlagStatus::Open)
            .map(|f| f.rule)
            .collect();
        assert_eq!(open, [FlagRule::UndueAutonomy, FlagRule::BenefitImposed]);
        let proxy = ResolutionAnnotation::new("p", AnnotationKind::ConsentByProxy, "a", "regulator", "x").unwrap();
        let flags = check_role_combinations(&m, &[proxy, reviewed("a")], &RoleRuleConfig::default());
        assert!(flags.iter().all(|f| f.status == FlagStatus::Resolved));
    }

    #[test]
    fn annotations_need_rationale_and_unique_ids() {
        assert!(matches!(
            ResolutionAnnotation::new("a", AnnotationKind::Mitigation, "x", "  ", "p"),
            Err(AnnotationError::EmptyRationale(_))
        ));
        let mut list = vec![];
        insert_annotation(&mut list, reviewed("b")).unwrap();
        insert_annotation(&mut list, reviewed("a")).unwrap();
        assert_eq!(list[0].id, "rev-a");
        assert!(matches!(
            insert_annotation(&mut list, reviewed("a")),
            Err(AnnotationError::Duplicate(_))
        ));
    }

    #[test]
    fn flag_serializes_rule_names() {
        let json = serde_json::to_string(&FlagRule::OnlyRisk).unwrap();
        assert_eq!(json, "\"R1-only-risk\"");
    }
}
