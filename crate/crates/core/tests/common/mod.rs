#![allow(dead_code)]

pub mod cases;
pub mod hull;
pub mod mutants;

use std::path::PathBuf;

use chrono::{DateTime, FixedOffset};
use eaa_core::equilibrium::{EventKind, Party, SessionState};
use eaa_core::matrices::ResolutionAnnotation;
use eaa_core::model::CaseMeta;
use eaa_core::pattern::BindingDoc;
use eaa_core::storage::{read_json, CaseFiles, SummariesDoc};
use eaa_core::AssuranceCase;
use serde::Deserialize;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures_dir().join(name)
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// The robo-taxi case with its sidecars: stakeholders, matrices and the
/// corrected summaries. No annotations.
pub fn robotaxi() -> AssuranceCase {
    CaseFiles::new(&fixture("robotaxi.eaa")).load().expect("fixture loads")
}

pub fn literal_summaries() -> SummariesDoc {
    read_json(&fixture("robotaxi-literal.summaries.json")).expect("literal summaries")
}

pub fn corrected_summaries() -> SummariesDoc {
    read_json(&fixture("robotaxi.summaries.json")).expect("summaries")
}

pub fn resolutions() -> Vec<ResolutionAnnotation> {
    read_json(&fixture("robotaxi.resolutions.json")).expect("resolutions")
}

pub fn bindings() -> BindingDoc {
    let case = robotaxi();
    let meta: CaseMeta = read_json(&fixture("robotaxi.meta.json")).expect("meta");
    BindingDoc {
        meta: Some(meta),
        stakeholders: case.stakeholders,
        matrices: case.matrices,
    }
}

#[derive(Debug, Deserialize)]
pub struct ScriptEvent {
    pub author: String,
    pub ts: DateTime<FixedOffset>,
    #[serde(flatten)]
    pub kind: serde_json::Value,
}

#[derive(Debug, Deserialize)]
pub struct Script {
    pub id: String,
    pub parties: Vec<Party>,
    pub events: Vec<ScriptEvent>,
}

pub fn script() -> Script {
    read_json(&fixture("robotaxi.session-script.json")).expect("session script")
}

/// Opens the scripted session on the fixture and submits every event.
/// Endorsements of `"current"` are bound to the hash at submission time.
/// `after` sees the state after each event together with its 1-based seq.
pub fn run_script(mut after: impl FnMut(u64, &SessionState)) -> SessionState {
    let script = script();
    let case = robotaxi();
    let mut state = SessionState::open(&script.id, &case, script.parties).expect("session opens");
    for event in script.events {
        let mut kind = event.kind;
        if kind["kind"] == "endorsement" && kind["snapshot"] == "current" {
            kind["snapshot"] = state.snapshot_hash().into();
        }
        let kind: EventKind = serde_json::from_value(kind).expect("script event decodes");
        let seq = state.submit(&event.author, event.ts, kind).expect("script event applies").seq;
        after(seq, &state);
    }
    state
}
