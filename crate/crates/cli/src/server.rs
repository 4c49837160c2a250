//! HTTP service running one experiment session.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ornament_core::survey::SurveyResponse;
use serde::Deserialize;
use serde_json::json;

use crate::assets::AssetStore;
use crate::error::{CliError, CliResult};
use crate::session::{replay, Event, SessionConfig, SessionError, SessionState, Status, Store};

/// Session state and its logs behind one lock, so writes are serialized.
pub struct Session {
    pub state: SessionState,
    store: Store,
}

pub struct AppState {
    session: Mutex<Session>,
    assets: AssetStore,
}

impl AppState {
    /// Restores the session from `data_dir` (or starts it) and opens the logs.
    pub fn open(config: &SessionConfig, data_dir: &Path) -> CliResult<Self> {
        let state = replay(config, data_dir)?;
        let store = Store::open(data_dir)?;
        Ok(AppState {
            session: Mutex::new(Session { state, store }),
            assets: AssetStore::new(config.ornament_assets.clone()),
        })
    }

    /// Snapshot of the current state.
    pub fn snapshot(&self) -> SessionState {
        self.lock().state.clone()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Session> {
        self.session.lock().unwrap_or_else(|p| p.into_inner())
    }
}

type Shared = Arc<AppState>;

fn error(status: StatusCode, msg: impl std::fmt::Display) -> Response {
    (status, Json(json!({ "error": msg.to_string() }))).into_response()
}

fn session_error(e: SessionError) -> Response {
    let status = match e {
        SessionError::UnknownParticipant(_) => StatusCode::NOT_FOUND,
        SessionError::Invalid(_) => StatusCode::BAD_REQUEST,
        SessionError::Closed | SessionError::Conflict(_) | SessionError::NotClosed => StatusCode::CONFLICT,
    };
    error(status, e)
}

fn internal(e: CliError) -> Response {
    error(StatusCode::INTERNAL_SERVER_ERROR, e)
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/participants", post(enroll))
        .route("/api/participants/{id}/next-task", get(next_task))
        .route("/api/responses", post(submit))
        .route("/api/results", get(results))
        .route("/api/results/{file}", get(result_file))
        .route("/api/session", get(session_info))
        .route("/api/session/close", post(close))
        .route("/assets/{file}", get(asset))
        .with_state(state)
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct EnrollBody {
    #[serde(default)]
    name: Option<String>,
}

fn parse_body<T: for<'de> Deserialize<'de> + Default>(body: &Bytes) -> Result<T, Response> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| error(StatusCode::BAD_REQUEST, format!("malformed body: {e}")))
}

async fn enroll(State(app): State<Shared>, body: Bytes) -> Response {
    let body: EnrollBody = match parse_body(&body) {
        Ok(b) => b,
        Err(r) => return r,
    };
    let mut s = app.lock();
    if s.state.status == Status::Closed {
        return session_error(SessionError::Closed);
    }
    let id = s.state.next_participant_id();
    let event = Event::Enroll { participant_id: id.clone(), name: body.name };
    if let Err(e) = s.store.append_event(&event) {
        return internal(e);
    }
    s.state.apply(&event);
    (StatusCode::CREATED, Json(json!({ "participantId": id }))).into_response()
}

async fn next_task(State(app): State<Shared>, UrlPath(id): UrlPath<String>) -> Response {
    let s = app.lock();
    let task = match s.state.next_task(&id) {
        Ok(Some(t)) => t,
        Ok(None) => return Json(json!({ "done": true })).into_response(),
        Err(e) => return session_error(e),
    };
    let mut v = serde_json::to_value(task).expect("task serializes");
    let obj = v.as_object_mut().expect("task is an object");
    obj.remove("correctOptionId");
    let urls: BTreeMap<&str, String> = std::iter::once(&task.query_ornament_id)
        .chain(&task.option_ornament_ids)
        .map(|o| (o.as_str(), format!("/assets/{o}.png")))
        .collect();
    obj.insert("assetUrls".into(), json!(urls));
    Json(v).into_response()
}

async fn submit(State(app): State<Shared>, body: Bytes) -> Response {
    let r: SurveyResponse = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed response: {e}")),
    };
    let mut s = app.lock();
    match s.state.prepare(&r) {
        Ok((Some(stored), outcome)) => {
            if let Err(e) = s.store.append_response(&stored) {
                return internal(e);
            }
            s.state.responses.push(stored);
            Json(outcome).into_response()
        }
        Ok((None, outcome)) => Json(outcome).into_response(),
        Err(e) => session_error(e),
    }
}

async fn results(State(app): State<Shared>) -> Response {
    let state = app.snapshot();
    match state.results() {
        Ok(report) => ([(header::CONTENT_TYPE, "application/json")], report.to_json_string()).into_response(),
        Err(e) => session_error(e),
    }
}

async fn result_file(State(app): State<Shared>, UrlPath(file): UrlPath<String>) -> Response {
    let state = app.snapshot();
    let report = match state.results() {
        Ok(r) => r,
        Err(e) => return session_error(e),
    };
    let kind = if file.ends_with(".json") { "application/json" } else { "text/csv" };
    match report.files().remove(&file) {
        Some(text) => ([(header::CONTENT_TYPE, kind)], text).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("no result file '{file}'")),
    }
}

async fn session_info(State(app): State<Shared>) -> Response {
    let s = app.lock();
    Json(json!({
        "sessionId": s.state.session_id,
        "status": s.state.status,
        "participants": s.state.participants.len(),
        "responses": s.state.responses.len(),
        "tasks": s.state.tasks.tasks.len(),
    }))
    .into_response()
}

async fn close(State(app): State<Shared>) -> Response {
    let mut s = app.lock();
    if s.state.status == Status::Open {
        if let Err(e) = s.store.append_event(&Event::Close) {
            return internal(e);
        }
        s.state.apply(&Event::Close);
    }
    Json(json!({ "status": Status::Closed })).into_response()
}

async fn asset(State(app): State<Shared>, UrlPath(file): UrlPath<String>) -> Response {
    let Some(id) = file.strip_suffix(".png").map(str::to_string) else {
        return error(StatusCode::NOT_FOUND, format!("no asset '{file}'"));
    };
    let app2 = app.clone();
    let id2 = id.clone();
    match tokio::task::spawn_blocking(move || app2.assets.get(&id2)).await {
        Ok(Ok(Some(bytes))) => ([(header::CONTENT_TYPE, "image/png")], bytes.as_ref().clone()).into_response(),
        Ok(Ok(None)) => error(StatusCode::NOT_FOUND, format!("no asset for '{id}'")),
        Ok(Err(e)) => internal(e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
    }
}

/// Binds `addr`; a busy port is an error.
pub async fn bind(addr: SocketAddr) -> CliResult<tokio::net::TcpListener> {
    tokio::net::TcpListener::bind(addr).await.map_err(|e| CliError::Server(format!("cannot listen on {addr}: {e}")))
}

/// Serves until the future `shutdown` completes.
pub async fn run(
    listener: tokio::net::TcpListener,
    state: Shared,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> CliResult<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(|e| CliError::Server(e.to_string()))
}
