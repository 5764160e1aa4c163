//! A loaded case plus its open session, kept in step: while a session is open
//! the case's matrices and annotations are the session's current snapshot.

use std::path::Path;

use chrono::{DateTime, FixedOffset};
use eaa_core::equilibrium::{EventKind, Proposal, SessionError, SessionState, Snapshot};
use eaa_core::matrices::{analyze, MatrixAnalysis};
use eaa_core::storage::{resolve_env, CaseFiles, StorageError};
use eaa_core::AssuranceCase;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error("recorded session does not replay: {0}")]
    Replay(SessionError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("no session is open for this case")]
    NoSession,
    #[error("an open session records every change, so an author is required")]
    AuthorRequired,
}

#[derive(Debug, Clone)]
pub struct Workspace {
    pub files: CaseFiles,
    pub case: AssuranceCase,
    pub session: Option<SessionState>,
}

impl Workspace {
    /// Resolves `path` (honouring the case directory variable) and loads the
    /// case and any recorded session.
    pub fn load(path: &Path) -> Result<Self, WorkspaceError> {
        let files = CaseFiles::new(&resolve_env(path)?);
        let case = files.load()?;
        Self::from_case(files, case)
    }

    pub fn from_case(files: CaseFiles, case: AssuranceCase) -> Result<Self, WorkspaceError> {
        let session = match case.sessions.first() {
            Some(log) => Some(SessionState::replay(log).map_err(WorkspaceError::Replay)?),
            None => None,
        };
        let mut ws = Self { files, case, session };
        ws.sync();
        Ok(ws)
    }

    fn sync(&mut self) {
        if let Some(state) = &self.session {
            self.case.matrices = state.snapshot().matrices.clone();
            self.case.annotations = state.snapshot().annotations.clone();
            self.case.sessions = vec![state.log().clone()];
        }
    }

    pub fn snapshot_hash(&self) -> String {
        match &self.session {
            Some(state) => state.snapshot_hash().to_string(),
            None => Snapshot::of(&self.case).hash(),
        }
    }

    pub fn analysis(&self) -> MatrixAnalysis {
        analyze(&self.case.stakeholders, &self.case.matrices, &self.case.annotations)
    }

    pub fn open_session(&mut self, state: SessionState) {
        self.session = Some(state);
        self.sync();
    }

    /// Applies a content change. With a session open it is logged as a
    /// proposal by `author`; otherwise it is applied directly.
    pub fn propose(
        &mut self,
        author: Option<&str>,
        ts: DateTime<FixedOffset>,
        proposal: Proposal,
    ) -> Result<(), WorkspaceError> {
        match &mut self.session {
            Some(state) => {
                let author = author.ok_or(WorkspaceError::AuthorRequired)?;
                state.submit(author, ts, EventKind::Proposal(proposal))?;
                self.sync();
            }
            None => {
                let mut snapshot = Snapshot::of(&self.case);
                snapshot.apply(&proposal, &self.case.stakeholders)?;
                self.case.matrices = snapshot.matrices;
                self.case.annotations = snapshot.annotations;
            }
        }
        Ok(())
    }

    /// Appends a session event and returns its sequence number.
    pub fn submit(
        &mut self,
        author: &str,
        ts: DateTime<FixedOffset>,
        kind: EventKind,
    ) -> Result<u64, WorkspaceError> {
        let state = self.session.as_mut().ok_or(WorkspaceError::NoSession)?;
        let seq = state.submit(author, ts, kind)?.seq;
        self.sync();
        Ok(seq)
    }

    pub fn persist(&self) -> Result<(), StorageError> {
        self.files.save_state(&self.case)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use eaa_core::equilibrium::{Party, PartyRole};
    use eaa_core::matrices::MatrixKind;
    use eaa_core::stakeholder::{Stakeholder, StakeholderRegistry};

    fn workspace() -> Workspace {
        let mut case = AssuranceCase::default();
        case.stakeholders = StakeholderRegistry::new(vec![Stakeholder::new("users", "Users")]).unwrap();
        case.matrices.benefits.push(eaa_core::matrices::BenefitRow::new(
            "users",
            "Mobility",
            [eaa_core::matrices::Rating::Uncertain; 3],
        ));
        Workspace::from_case(CaseFiles::new(Path::new("w.eaa")), case).unwrap()
    }

    fn edit() -> Proposal {
        Proposal::MatrixCellEdit {
            matrix: MatrixKind::Benefits,
            row: "users/mobility".into(),
            field: "likelihood".into(),
            value: "high".into(),
        }
    }

    fn ts() -> DateTime<FixedOffset> {
        DateTime::parse_from_rfc3339("2026-01-01T00:00:00Z").unwrap()
    }

    #[test]
    fn edits_apply_directly_without_a_session() {
        let mut ws = workspace();
        let before = ws.snapshot_hash();
        ws.propose(None, ts(), edit()).unwrap();
        assert_ne!(ws.snapshot_hash(), before);
        assert_eq!(ws.case.matrices.benefits[0].likelihood.label(), "High");
        assert!(matches!(ws.submit("a", ts(), EventKind::Withdrawal { objection: 1 }), Err(WorkspaceError::NoSession)));
    }

    #[test]
    fn session_edits_are_logged_and_mirrored() {
        let mut ws = workspace();
        let parties = vec![
            Party::new("a", "A", PartyRole::TeamMember),
            Party::new("b", "B", PartyRole::IndependentEthicist),
        ];
        ws.open_session(SessionState::open("s", &ws.case, parties).unwrap());
        assert!(matches!(ws.propose(None, ts(), edit()), Err(WorkspaceError::AuthorRequired)));
        ws.propose(Some("a"), ts(), edit()).unwrap();
        let state = ws.session.as_ref().unwrap();
        assert_eq!(state.events().len(), 1);
        assert_eq!(ws.case.matrices, state.snapshot().matrices);
        assert_eq!(ws.case.sessions, [state.log().clone()]);
        assert_eq!(ws.snapshot_hash(), state.snapshot_hash());
    }
}
