//! Local JSON API over one case. A single writer task owns the workspace and
//! applies mutations in arrival order; readers see the last published state.

use std::io;
use std::net::{Ipv4Addr, SocketAddr};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use eaa_core::canonical::encode;
use eaa_core::equilibrium::{EventKind, Party, Proposal, SessionError, SessionLog, StatusReport};
use eaa_core::matrices::{Flag, MatrixAnalysis, MatrixError, MatrixKind, Matrices, NewRow, ResolutionAnnotation};
use eaa_core::render::{to_html_report, RenderOptions};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::{mpsc, oneshot, watch};

use crate::commands::parse_ts;
use crate::workspace::{Workspace, WorkspaceError};

pub const DEFAULT_PORT: u16 = 7341;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub error: String,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl Into<String>) -> Self {
        Self {
            status: status.as_u16(),
            error: error.to_string(),
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }
}

impl From<WorkspaceError> for ApiError {
    fn from(e: WorkspaceError) -> Self {
        let message = e.to_string();
        match e {
            WorkspaceError::Session(SessionError::StaleEndorsement { .. }) => {
                Self::new(StatusCode::CONFLICT, "stale_snapshot", message)
            }
            WorkspaceError::Session(SessionError::Matrix(MatrixError::UnknownRow(..))) => {
                Self::new(StatusCode::NOT_FOUND, "unknown_row", message)
            }
            WorkspaceError::NoSession => Self::new(StatusCode::NOT_FOUND, "no_session", message),
            WorkspaceError::Session(_) | WorkspaceError::AuthorRequired => Self::bad_request(message),
            WorkspaceError::Storage(_) | WorkspaceError::Replay(_) => {
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", message)
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowIds {
    pub benefits: Vec<String>,
    pub risks: Vec<String>,
    pub autonomy: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub parties: Vec<Party>,
    pub events: usize,
    pub status: StatusReport,
}

/// Matrices, everything derived from them, and the session status, all for one snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateView {
    pub snapshot: String,
    pub matrices: Matrices,
    pub row_ids: RowIds,
    pub analysis: MatrixAnalysis,
    pub session: Option<SessionView>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlagsView {
    pub snapshot: String,
    pub flags: Vec<Flag>,
    pub open_errors: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionDoc {
    pub snapshot: String,
    pub log: Option<SessionLog>,
    pub status: Option<StatusReport>,
}

fn state_view(ws: &Workspace) -> StateView {
    let m = &ws.case.matrices;
    StateView {
        snapshot: ws.snapshot_hash(),
        matrices: m.clone(),
        row_ids: RowIds {
            benefits: m.row_ids(MatrixKind::Benefits),
            risks: m.row_ids(MatrixKind::Risks),
            autonomy: m.row_ids(MatrixKind::Autonomy),
        },
        analysis: ws.analysis(),
        session: ws.session.as_ref().map(|s| SessionView {
            id: s.log().id.clone(),
            parties: s.log().parties.clone(),
            events: s.events().len(),
            status: s.status(),
        }),
    }
}

#[derive(Debug, Deserialize)]
struct PatchBody {
    field: String,
    value: String,
    #[serde(default)]
    author: Option<String>,
}

#[derive(Debug, Deserialize)]
struct AddRowBody {
    row: serde_json::Value,
    #[serde(default)]
    author: Option<String>,
}

#[derive(Debug, Deserialize)]
struct AnnotationBody {
    #[serde(flatten)]
    annotation: ResolutionAnnotation,
    /// Session party filing the annotation, when it differs from the author.
    #[serde(default)]
    party: Option<String>,
}

#[derive(Debug, Deserialize)]
struct EventBody {
    author: String,
    #[serde(default)]
    ts: Option<String>,
    #[serde(flatten)]
    kind: EventKind,
}

enum Mutation {
    Propose { author: Option<String>, ts: Option<String>, proposal: Proposal },
    Event(EventBody),
}

struct Job {
    mutation: Mutation,
    reply: oneshot::Sender<Result<StateView, ApiError>>,
}

#[derive(Clone)]
pub struct AppState {
    jobs: mpsc::Sender<Job>,
    current: watch::Receiver<Arc<Workspace>>,
}

impl AppState {
    /// The last published workspace.
    pub fn snapshot(&self) -> Arc<Workspace> {
        self.current.borrow().clone()
    }

    async fn mutate(&self, mutation: Mutation) -> Result<StateView, ApiError> {
        let (reply, rx) = oneshot::channel();
        let gone = || ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "writer_stopped", "the case writer has stopped");
        self.jobs.send(Job { mutation, reply }).await.map_err(|_| gone())?;
        rx.await.map_err(|_| gone())?
    }
}

fn apply(ws: &mut Workspace, mutation: Mutation) -> Result<(), ApiError> {
    match mutation {
        Mutation::Propose { author, ts, proposal } => {
            let ts = parse_ts(ts.as_deref()).map_err(|e| ApiError::bad_request(e.to_string()))?;
            ws.propose(author.as_deref(), ts, proposal)?;
        }
        Mutation::Event(body) => {
            let ts = parse_ts(body.ts.as_deref()).map_err(|e| ApiError::bad_request(e.to_string()))?;
            ws.submit(&body.author, ts, body.kind)?;
        }
    }
    ws.persist().map_err(|e| WorkspaceError::from(e).into())
}

async fn writer(mut ws: Workspace, mut jobs: mpsc::Receiver<Job>, publish: watch::Sender<Arc<Workspace>>) {
    while let Some(job) = jobs.recv().await {
        let mut next = ws.clone();
        let result = apply(&mut next, job.mutation).map(|()| {
            ws = next;
            publish.send_replace(Arc::new(ws.clone()));
            state_view(&ws)
        });
        let _ = job.reply.send(result);
    }
}

/// Spawns the writer task for `ws`. Must be called inside a Tokio runtime.
pub fn start(ws: Workspace) -> AppState {
    let (jobs, rx) = mpsc::channel(64);
    let (publish, current) = watch::channel(Arc::new(ws.clone()));
    tokio::spawn(writer(ws, rx, publish));
    AppState { jobs, current }
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        ApiError::bad_request(format!("malformed body at {}: {}", e.path(), e.inner()))
    })
}

fn matrix_kind(kind: &str) -> Result<MatrixKind, ApiError> {
    kind.parse()
        .map_err(|e: MatrixError| ApiError::new(StatusCode::NOT_FOUND, "unknown_matrix", e.to_string()))
}

async fn get_case(State(app): State<AppState>) -> Response {
    let ws = app.snapshot();
    ([(header::CONTENT_TYPE, "application/json")], encode(&ws.case)).into_response()
}

async fn get_matrices(State(app): State<AppState>) -> Json<StateView> {
    Json(state_view(&app.snapshot()))
}

async fn get_flags(State(app): State<AppState>) -> Json<FlagsView> {
    let ws = app.snapshot();
    let analysis = ws.analysis();
    Json(FlagsView {
        snapshot: ws.snapshot_hash(),
        open_errors: analysis.open_errors().count(),
        flags: analysis.flags,
    })
}

async fn get_session(State(app): State<AppState>) -> Json<SessionDoc> {
    let ws = app.snapshot();
    Json(SessionDoc {
        snapshot: ws.snapshot_hash(),
        log: ws.session.as_ref().map(|s| s.log().clone()),
        status: ws.session.as_ref().map(|s| s.status()),
    })
}

async fn get_report(State(app): State<AppState>) -> Response {
    let ws = app.snapshot();
    (
        [(header::CONTENT_TYPE, "text/html; charset=utf-8")],
        to_html_report(&ws.case, &RenderOptions::default()),
    )
        .into_response()
}

async fn patch_cell(
    State(app): State<AppState>,
    Path((kind, row)): Path<(String, String)>,
    bytes: Bytes,
) -> Result<Json<StateView>, ApiError> {
    let matrix = matrix_kind(&kind)?;
    let b: PatchBody = body(&bytes)?;
    let proposal = Proposal::MatrixCellEdit {
        matrix,
        row,
        field: b.field,
        value: b.value,
    };
    app.mutate(Mutation::Propose {
        author: b.author,
        ts: None,
        proposal,
    })
    .await
    .map(Json)
}

async fn add_row(
    State(app): State<AppState>,
    Path(kind): Path<String>,
    bytes: Bytes,
) -> Result<Json<StateView>, ApiError> {
    let matrix = matrix_kind(&kind)?;
    let b: AddRowBody = body(&bytes)?;
    let decode = |v: serde_json::Value| -> Result<NewRow, serde_json::Error> {
        Ok(match matrix {
            MatrixKind::Benefits => NewRow::Benefits(serde_json::from_value(v)?),
            MatrixKind::Risks => NewRow::Risks(serde_json::from_value(v)?),
            MatrixKind::Autonomy => NewRow::Autonomy(serde_json::from_value(v)?),
        })
    };
    let row = decode(b.row).map_err(|e| ApiError::bad_request(format!("malformed row: {e}")))?;
    app.mutate(Mutation::Propose {
        author: b.author,
        ts: None,
        proposal: Proposal::RowAdd { row },
    })
    .await
    .map(Json)
}

async fn add_annotation(State(app): State<AppState>, bytes: Bytes) -> Result<Json<StateView>, ApiError> {
    let b: AnnotationBody = body(&bytes)?;
    let author = b.party.unwrap_or_else(|| b.annotation.author.clone());
    app.mutate(Mutation::Propose {
        author: Some(author),
        ts: None,
        proposal: Proposal::AnnotationAdd {
            annotation: b.annotation,
        },
    })
    .await
    .map(Json)
}

async fn add_event(State(app): State<AppState>, bytes: Bytes) -> Result<Json<StateView>, ApiError> {
    let b: EventBody = body(&bytes)?;
    app.mutate(Mutation::Event(b)).await.map(Json)
}

pub fn router(app: AppState) -> Router {
    Router::new()
        .route("/api/case", get(get_case))
        .route("/api/matrices", get(get_matrices))
        .route("/api/matrices/{kind}", post(add_row))
        .route("/api/matrices/{kind}/{*row}", patch(patch_cell))
        .route("/api/annotations", post(add_annotation))
        .route("/api/flags", get(get_flags))
        .route("/api/session", get(get_session))
        .route("/api/session/events", post(add_event))
        .route("/api/report", get(get_report))
        .with_state(app)
}

/// Serves on localhost until interrupted.
pub async fn serve(ws: Workspace, port: u16) -> io::Result<()> {
    let app = router(start(ws));
    let listener = tokio::net::TcpListener::bind(SocketAddr::from((Ipv4Addr::LOCALHOST, port))).await?;
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
