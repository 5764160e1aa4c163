//! Append-only deliberation log. Endorsements bind to the content hash of the
//! matrices and annotations they were given against, so any content change
//! leaves earlier endorsements behind.

use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::canonical::{canonical_json, canonical_pretty};
use crate::matrices::{
    analyze, insert_annotation, AnnotationError, FlagRule, MatrixError, MatrixKind, Matrices, NewRow,
    ResolutionAnnotation,
};
use crate::model::AssuranceCase;
use crate::stakeholder::StakeholderRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartyRole {
    StakeholderRepresentative,
    TeamMember,
    IndependentEthicist,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub id: String,
    pub name: String,
    pub role: PartyRole,
}

impl Party {
    pub fn new(id: &str, name: &str, role: PartyRole) -> Self {
        Self {
            id: id.to_string(),
            name: name.to_string(),
            role,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectionBasis {
    Intuition,
    EthicalPrinciple,
    NonEthicalJudgement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "proposal", rename_all = "snake_case")]
pub enum Proposal {
    MatrixCellEdit {
        matrix: MatrixKind,
        row: String,
        field: String,
        value: String,
    },
    RowAdd {
        row: NewRow,
    },
    AnnotationAdd {
        annotation: ResolutionAnnotation,
    },
    ScopeNote {
        text: String,
    },
}

impl Proposal {
    /// Whether applying the proposal can change the snapshot.
    pub fn edits_content(&self) -> bool {
        !matches!(self, Proposal::ScopeNote { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Proposal(Proposal),
    Objection {
        basis: ObjectionBasis,
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        refers_to: Option<u64>,
    },
    Endorsement {
        snapshot: String,
    },
    Withdrawal {
        objection: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub seq: u64,
    pub ts: DateTime<FixedOffset>,
    pub author: String,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// The content endorsements bind to.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub matrices: Matrices,
    pub annotations: Vec<ResolutionAnnotation>,
}

impl Snapshot {
    pub fn of(case: &AssuranceCase) -> Self {
        Self {
            matrices: case.matrices.clone(),
            annotations: case.annotations.clone(),
        }
    }

    /// SHA-256 hex of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(canonical_json(self).as_bytes()))
    }

    pub fn apply(&mut self, proposal: &Proposal, registry: &StakeholderRegistry) -> Result<(), SessionError> {
        match proposal {
            Proposal::MatrixCellEdit {
                matrix,
                row,
                field,
                value,
            } => self.matrices.set_cell(*matrix, row, field, value)?,
            Proposal::RowAdd { row } => {
                self.matrices.add_row(row.clone(), registry)?;
            }
            Proposal::AnnotationAdd { annotation } => {
                if !registry.contains(&annotation.stakeholder) {
                    return Err(MatrixError::UnknownStakeholder(annotation.stakeholder.clone()).into());
                }
                insert_annotation(&mut self.annotations, annotation.clone())?;
            }
            Proposal::ScopeNote { .. } => {}
        }
        Ok(())
    }
}

/// The exported, replayable record of one session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionLog {
    pub id: String,
    pub parties: Vec<Party>,
    pub stakeholders: StakeholderRegistry,
    pub base: Snapshot,
    #[serde(default)]
    pub events: Vec<SessionEvent>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SessionError {
    #[error("a deliberation needs at least two parties")]
    TooFewParties,
    #[error("duplicate party `{0}`")]
    DuplicateParty(String),
    #[error("unknown party `{0}`")]
    UnknownAuthor(String),
    #[error("endorsement is for snapshot {given} but the current snapshot is {current}")]
    StaleEndorsement { given: String, current: String },
    #[error("event sequence number {found} where {expected} was expected")]
    OutOfSequence { expected: u64, found: u64 },
    #[error("event {0} is not an objection")]
    NotAnObjection(u64),
    #[error("objection {0} does not exist")]
    UnknownEvent(u64),
    #[error("objection {objection} can only be withdrawn by `{author}`")]
    NotObjectionAuthor { objection: u64, author: String },
    #[error("objection {0} is already withdrawn")]
    AlreadyWithdrawn(u64),
    #[error("objection text must not be empty")]
    EmptyObjection,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumStatus {
    InProgress,
    EquilibriumReached,
}

impl fmt::Display for EquilibriumStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EquilibriumStatus::InProgress => "in progress",
            EquilibriumStatus::EquilibriumReached => "equilibrium reached",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "blocker", rename_all = "snake_case")]
pub enum Blocker {
    MissingEthicist,
    MissingEndorsement { party: String },
    OpenObjection { seq: u64, author: String },
    OpenErrorFlag { rule: FlagRule, stakeholder: String },
}

impl fmt::Display for Blocker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Blocker::MissingEthicist => f.write_str("no independent ethicist is taking part"),
            Blocker::MissingEndorsement { party } => {
                write!(f, "`{party}` has not endorsed the current snapshot")
            }
            Blocker::OpenObjection { seq, author } => {
                write!(f, "objection {seq} by `{author}` is still open")
            }
            Blocker::OpenErrorFlag { rule, stakeholder } => {
                write!(f, "{rule} is open for `{stakeholder}`")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusReport {
    pub status: EquilibriumStatus,
    pub snapshot: String,
    pub blockers: Vec<Blocker>,
}

/// A session folded up to its last event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionState {
    log: SessionLog,
    current: Snapshot,
    hash: String,
    /// Seq of the last content-editing proposal, 0 if none.
    epoch: u64,
}

impl SessionState {
    /// Opens a session on the case's current matrices and annotations.
    pub fn open(id: &str, case: &AssuranceCase, parties: Vec<Party>) -> Result<Self, SessionError> {
        if parties.len() < 2 {
            return Err(SessionError::TooFewParties);
        }
        let mut seen = BTreeSet::new();
        for p in &parties {
            if !seen.insert(p.id.as_str()) {
                return Err(SessionError::DuplicateParty(p.id.clone()));
            }
        }
        let base = Snapshot::of(case);
        Ok(Self {
            hash: base.hash(),
            current: base.clone(),
            log: SessionLog {
                id: id.to_string(),
                parties,
                stakeholders: case.stakeholders.clone(),
                base,
                events: Vec::new(),
            },
            epoch: 0,
        })
    }

    /// Rebuilds the state by folding the logged events over the base snapshot.
    pub fn replay(log: &SessionLog) -> Result<Self, SessionError> {
        let mut state = Self {
            log: SessionLog {
                events: Vec::new(),
                ..log.clone()
            },
            current: log.base.clone(),
            hash: log.base.hash(),
            epoch: 0,
        };
        if state.log.parties.len() < 2 {
            return Err(SessionError::TooFewParties);
        }
        for event in &log.events {
            state.apply(event.clone())?;
        }
        Ok(state)
    }

    pub fn log(&self) -> &SessionLog {
        &self.log
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.current
    }

    pub fn snapshot_hash(&self) -> &str {
        &self.hash
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.log.events
    }

    pub fn next_seq(&self) -> u64 {
        self.log.events.len() as u64 + 1
    }

    /// Appends an event authored now-ish by `author`; the caller supplies the timestamp.
    pub fn submit(
        &mut self,
        author: &str,
        ts: DateTime<FixedOffset>,
        kind: EventKind,
    ) -> Result<&SessionEvent, SessionError> {
        let event = SessionEvent {
            seq: self.next_seq(),
            ts,
            author: author.to_string(),
            kind,
        };
        self.apply(event)?;
        Ok(self.log.events.last().expect("event was just appended"))
    }

    /// Validates and appends one event. Nothing changes on error.
    pub fn apply(&mut self, event: SessionEvent) -> Result<(), SessionError> {
        let expected = self.next_seq();
        if event.seq != expected {
            return Err(SessionError::OutOfSequence {
                expected,
                found: event.seq,
            });
        }
        if !self.log.parties.iter().any(|p| p.id == event.author) {
            return Err(SessionError::UnknownAuthor(event.author.clone()));
        }
        match &event.kind {
            EventKind::Proposal(proposal) => {
                let mut next = self.current.clone();
                next.apply(proposal, &self.log.stakeholders)?;
                if proposal.edits_content() {
                    self.hash = next.hash();
                    self.current = next;
                    self.epoch = event.seq;
                }
            }
            EventKind::Objection { text, refers_to, .. } => {
                if text.trim().is_empty() {
                    return Err(SessionError::EmptyObjection);
                }
                if let Some(seq) = refers_to {
                    if self.event(*seq).is_none() {
                        return Err(SessionError::UnknownEvent(*seq));
                    }
                }
            }
            EventKind::Endorsement { snapshot } => {
                if *snapshot != self.hash {
                    return Err(SessionError::StaleEndorsement {
                        given: snapshot.clone(),
                        current: self.hash.clone(),
                    });
                }
            }
            EventKind::Withdrawal { objection } => {
                let target = self.event(*objection).ok_or(SessionError::UnknownEvent(*objection))?;
                if !matches!(target.kind, EventKind::Objection { .. }) {
                    return Err(SessionError::NotAnObjection(*objection));
                }
                if target.author != event.author {
                    return Err(SessionError::NotObjectionAuthor {
                        objection: *objection,
                        author: target.author.clone(),
                    });
                }
                if self.withdrawn().contains(objection) {
                    return Err(SessionError::AlreadyWithdrawn(*objection));
                }
            }
        }
        self.log.events.push(event);
        Ok(())
    }

    fn event(&self, seq: u64) -> Option<&SessionEvent> {
        seq.checked_sub(1).and_then(|i| self.log.events.get(i as usize))
    }

    fn withdrawn(&self) -> BTreeSet<u64> {
        self.log
            .events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::Withdrawal { objection } => Some(objection),
                _ => None,
            })
            .collect()
    }

    /// Equilibrium holds when an ethicist takes part, every party has endorsed
    /// the current snapshot since it last changed, no unwithdrawn objection is
    /// newer than the earliest of those endorsements, and no error flag is open.
    pub fn status(&self) -> StatusReport {
        let mut blockers = Vec::new();
        if !self
            .log
            .parties
            .iter()
            .any(|p| p.role == PartyRole::IndependentEthicist)
        {
            blockers.push(Blocker::MissingEthicist);
        }
        let binding: Vec<&SessionEvent> = self
            .log
            .events
            .iter()
            .filter(|e| e.seq > self.epoch && matches!(&e.kind, EventKind::Endorsement { snapshot } if *snapshot == self.hash))
            .collect();
        for p in &self.log.parties {
            if !binding.iter().any(|e| e.author == p.id) {
                blockers.push(Blocker::MissingEndorsement { party: p.id.clone() });
            }
        }
        let since = binding.iter().map(|e| e.seq).min().unwrap_or(self.epoch);
        let withdrawn = self.withdrawn();
        for e in &self.log.events {
            if matches!(e.kind, EventKind::Objection { .. }) && e.seq > since && !withdrawn.contains(&e.seq) {
                blockers.push(Blocker::OpenObjection {
                    seq: e.seq,
                    author: e.author.clone(),
                });
            }
        }
        let analysis = analyze(&self.log.stakeholders, &self.current.matrices, &self.current.annotations);
        for flag in analysis.open_errors() {
            blockers.push(Blocker::OpenErrorFlag {
                rule: flag.rule,
                stakeholder: flag.stakeholder.clone(),
            });
        }
        StatusReport {
            status: if blockers.is_empty() {
                EquilibriumStatus::EquilibriumReached
            } else {
                EquilibriumStatus::InProgress
            },
            snapshot: self.hash.clone(),
            blockers,
        }
    }

    /// Deterministic JSON of the full log.
    pub fn export_log(&self) -> String {
        canonical_pretty(&self.log)
    }

    pub fn import_log(text: &str) -> Result<SessionLog, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{AnnotationKind, BenefitRow, Level3, Rating, RiskRow};
    use crate::stakeholder::Stakeholder;

    fn ts(minute: u32) -> DateTime<FixedOffset> {
        DateTime::parse_from_rfc3339(&format!("2026-03-01T10:{minute:02}:00+00:00")).unwrap()
    }

    fn case() -> AssuranceCase {
        let mut c = AssuranceCase::default();
        c.stakeholders = StakeholderRegistry::new(vec![Stakeholder::new("a", "A"), Stakeholder::new("b", "B")]).unwrap();
        c.matrices.benefits.push(BenefitRow::new("a", "k", [Rating::Known(Level3::Medium); 3]));
        c.matrices.risks.push(RiskRow::new("a", "k", [Rating::Known(Level3::Low); 3]));
        for who in ["a", "b"] {
            c.annotations.push(
                ResolutionAnnotation::new(&format!("rev-{who}"), AnnotationKind::EntrenchmentReview, who, "ok", "e")
                    .unwrap(),
            );
        }
        c
    }

    fn parties() -> Vec<Party> {
        vec![
            Party::new("rep", "Rep", PartyRole::StakeholderRepresentative),
            Party::new("eth", "Ethicist", PartyRole::IndependentEthicist),
        ]
    }

    #[test]
    fn open_requires_two_distinct_parties() {
        assert_eq!(
            SessionState::open("s", &case(), parties()[..1].to_vec()).unwrap_err(),
            SessionError::TooFewParties
        );
        let dup = vec![parties()[0].clone(), parties()[0].clone()];
        assert!(matches!(
            SessionState::open("s", &case(), dup),
            Err(SessionError::DuplicateParty(_))
        ));
    }

    #[test]
    fn fresh_session_blocks_on_every_endorsement() {
        let s = SessionState::open("s", &case(), parties()).unwrap();
        let status = s.status();
        assert_eq!(status.status, EquilibriumStatus::InProgress);
        assert_eq!(
            status.blockers,
            [
                Blocker::MissingEndorsement { party: "rep".into() },
                Blocker::MissingEndorsement { party: "eth".into() }
            ]
        );
        assert_eq!(status.snapshot, Snapshot::of(&case()).hash());
    }

    #[test]
    fn edits_invalidate_endorsements() {
        let mut s = SessionState::open("s", &case(), parties()).unwrap();
        let h = s.snapshot_hash().to_string();
        s.submit("rep", ts(1), EventKind::Endorsement { snapshot: h.clone() }).unwrap();
        s.submit("eth", ts(2), EventKind::Endorsement { snapshot: h.clone() }).unwrap();
        assert_eq!(s.status().status, EquilibriumStatus::EquilibriumReached);
        s.submit(
            "rep",
            ts(3),
            EventKind::Proposal(Proposal::MatrixCellEdit {
                matrix: MatrixKind::Benefits,
                row: "a/k".into(),
                field: "impact".into(),
                value: "high".into(),
            }),
        )
        .unwrap();
        assert_ne!(s.snapshot_hash(), h);
        assert_eq!(s.status().status, EquilibriumStatus::InProgress);
        let err = s.submit("eth", ts(4), EventKind::Endorsement { snapshot: h }).unwrap_err();
        assert!(matches!(err, SessionError::StaleEndorsement { .. }));
        assert_eq!(s.events().len(), 3);
    }

    #[test]
    fn objections_block_until_withdrawn() {
        let mut s = SessionState::open("s", &case(), parties()).unwrap();
        let h = s.snapshot_hash().to_string();
        s.submit("rep", ts(1), EventKind::Endorsement { snapshot: h.clone() }).unwrap();
        s.submit(
            "eth",
            ts(2),
            EventKind::Objection {
                basis: ObjectionBasis::Intuition,
                text: "feels wrong".into(),
                refers_to: None,
            },
        )
        .unwrap();
        s.submit("eth", ts(3), EventKind::Endorsement { snapshot: h }).unwrap();
        assert!(s.status().blockers.contains(&Blocker::OpenObjection { seq: 2, author: "eth".into() }));
        assert!(matches!(
            s.submit("rep", ts(4), EventKind::Withdrawal { objection: 2 }),
            Err(SessionError::NotObjectionAuthor { .. })
        ));
        s.submit("eth", ts(4), EventKind::Withdrawal { objection: 2 }).unwrap();
        assert_eq!(s.status().status, EquilibriumStatus::EquilibriumReached);
    }

    #[test]
    fn no_ethicist_never_reaches_equilibrium() {
        let ps = vec![
            Party::new("a", "A", PartyRole::TeamMember),
            Party::new("b", "B", PartyRole::TeamMember),
        ];
        let mut s = SessionState::open("s", &case(), ps).unwrap();
        let h = s.snapshot_hash().to_string();
        for p in ["a", "b"] {
            s.submit(p, ts(1), EventKind::Endorsement { snapshot: h.clone() }).unwrap();
        }
        assert_eq!(s.status().blockers, [Blocker::MissingEthicist]);
    }

    #[test]
    fn unknown_author_and_sequence_gaps() {
        let mut s = SessionState::open("s", &case(), parties()).unwrap();
        assert!(matches!(
            s.submit("zed", ts(1), EventKind::Proposal(Proposal::ScopeNote { text: "x".into() })),
            Err(SessionError::UnknownAuthor(_))
        ));
        let bad = SessionEvent {
            seq: 5,
            ts: ts(1),
            author: "rep".into(),
            kind: EventKind::Proposal(Proposal::ScopeNote { text: "x".into() }),
        };
        assert!(matches!(s.apply(bad), Err(SessionError::OutOfSequence { expected: 1, found: 5 })));
    }

    #[test]
    fn export_replays_identically() {
        let mut s = SessionState::open("s", &case(), parties()).unwrap();
        s.submit("rep", ts(1), EventKind::Proposal(Proposal::ScopeNote { text: "scope".into() }))
            .unwrap();
        let text = s.export_log();
        let log = SessionState::import_log(&text).unwrap();
        let again = SessionState::replay(&log).unwrap();
        assert_eq!(again, s);
        assert_eq!(again.export_log(), text);
        assert!(text.contains("\"ts\": \"2026-03-01T10:01:00"), "{text}");
    }
}
