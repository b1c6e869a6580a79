//! HTTP API under `/api/v1`.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use scriptflow_core::graph_ir::{NodeId, SCHEMA_VERSION};
use scriptflow_core::{Catalog, ScriptDocument};
use serde_json::{json, Value};

use crate::agents::PipelineTranscript;
use crate::backend::Backend;
use crate::engine::{self, ApiError};

pub const DEFAULT_PORT: u16 = 7878;
pub const GENERATE_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: String,
    pub document: ScriptDocument,
    pub overrides: BTreeMap<NodeId, f64>,
    pub transcripts: Vec<Value>,
}

impl Session {
    fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "document": engine::document_json(&self.document),
            "overrides": self.overrides.iter().map(|(k, v)| (k.get().to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
            "transcripts": self.transcripts,
        })
    }
}

pub struct AppState {
    pub catalog: Arc<Catalog>,
    pub backend: Arc<dyn Backend>,
    pub generate_timeout: Duration,
    sessions: Mutex<HashMap<String, Session>>,
}

impl AppState {
    pub fn new(catalog: Catalog, backend: Arc<dyn Backend>) -> Arc<Self> {
        Self::with_timeout(catalog, backend, GENERATE_TIMEOUT)
    }

    pub fn with_timeout(catalog: Catalog, backend: Arc<dyn Backend>, timeout: Duration) -> Arc<Self> {
        Arc::new(AppState {
            catalog: Arc::new(catalog),
            backend,
            generate_timeout: timeout,
            sessions: Mutex::new(HashMap::new()),
        })
    }

    fn sessions(&self) -> std::sync::MutexGuard<'_, HashMap<String, Session>> {
        self.sessions.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn session(&self, id: &str) -> Result<Session, ApiError> {
        self.sessions().get(id).cloned().ok_or_else(|| not_found(format!("no session `{id}`")))
    }
}

type Shared = Arc<AppState>;

fn not_found(message: String) -> ApiError {
    ApiError::new(404, "not_found", message)
}

fn json_response(status: StatusCode, v: &Value) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], engine::body(v)).into_response()
}

fn error_response(e: &ApiError) -> Response {
    json_response(StatusCode::from_u16(e.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR), &e.to_json())
}

fn reply(r: Result<Value, ApiError>) -> Response {
    match r {
        Ok(v) => json_response(StatusCode::OK, &v),
        Err(e) => error_response(&e),
    }
}

/// Request bodies are read by hand so malformed JSON gets the same error shape as
/// everything else.
fn parse_body(body: &Bytes) -> Result<Value, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(json!({}));
    }
    let v: Value = serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("request body is not JSON: {e}")))?;
    if !v.is_object() {
        return Err(ApiError::bad_request("request body must be a JSON object"));
    }
    Ok(v)
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/v1/generate", post(generate))
        .route("/api/v1/validate", post(validate))
        .route("/api/v1/repair", post(repair))
        .route("/api/v1/evaluate", post(evaluate))
        .route("/api/v1/registry", get(registry))
        .route("/api/v1/session", get(list_sessions).post(create_session))
        .route("/api/v1/session/{id}", get(get_session).put(update_session).delete(delete_session))
        .route("/api/v1/session/{id}/evaluate", post(evaluate_session))
        .fallback(|| async { error_response(&not_found("no such endpoint".into())) })
        .method_not_allowed_fallback(|| async { error_response(&ApiError::new(405, "method_not_allowed", "method not allowed")) })
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state: Shared) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

async fn run_generate(state: &Shared, prompt: String) -> Result<PipelineTranscript, ApiError> {
    if prompt.trim().is_empty() {
        return Err(ApiError::new(422, "empty_prompt", "prompt is empty"));
    }
    let (catalog, backend) = (state.catalog.clone(), state.backend.clone());
    let job = tokio::task::spawn_blocking(move || engine::generate(&prompt, &catalog, backend.as_ref()));
    match tokio::time::timeout(state.generate_timeout, job).await {
        Err(_) => Err(ApiError::new(504, "timeout", format!("generation exceeded {} s", state.generate_timeout.as_secs()))),
        Ok(Err(e)) => Err(ApiError::new(500, "internal", format!("generation task failed: {e}"))),
        Ok(Ok(r)) => r,
    }
}

async fn generate(State(state): State<Shared>, body: Bytes) -> Response {
    let req = match parse_body(&body) {
        Ok(v) => v,
        Err(e) => return error_response(&e),
    };
    let Some(prompt) = req["prompt"].as_str() else {
        return error_response(&ApiError::bad_request("`prompt` must be a string"));
    };
    let session_id = req["session_id"].as_str().map(str::to_string);
    if let Some(id) = &session_id {
        if let Err(e) = state.session(id) {
            return error_response(&e);
        }
    }
    let t = match run_generate(&state, prompt.to_string()).await {
        Ok(t) => t,
        Err(e) => return error_response(&e),
    };
    let transcript = t.to_json();
    let Some(doc) = &t.document else {
        let mut body = engine::generation_failure(&t).to_json();
        body["transcript"] = transcript;
        return json_response(StatusCode::BAD_GATEWAY, &body);
    };
    if let Some(id) = session_id {
        if let Some(s) = state.sessions().get_mut(&id) {
            s.document = doc.clone();
            s.overrides.clear();
            s.transcripts.push(transcript.clone());
        }
    }
    json_response(StatusCode::OK, &transcript)
}

async fn validate(State(state): State<Shared>, body: Bytes) -> Response {
    reply(parse_body(&body).and_then(|req| {
        let c = engine::check_value(&req["document"], &state.catalog)?;
        Ok(engine::diagnostics_json(&c.diagnostics))
    }))
}

async fn repair(State(state): State<Shared>, body: Bytes) -> Response {
    reply(parse_body(&body).and_then(|req| {
        let c = engine::check_value(&req["document"], &state.catalog)?;
        let ids = match &req["repair_ids"] {
            Value::Null => None,
            Value::Array(a) => Some(
                a.iter()
                    .map(|v| v.as_str().map(str::to_string).ok_or_else(|| ApiError::bad_request("`repair_ids` must hold strings")))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            _ => return Err(ApiError::bad_request("`repair_ids` must be an array")),
        };
        Ok(engine::repair(&c, ids.as_deref(), &state.catalog)?.to_json())
    }))
}

async fn evaluate(State(state): State<Shared>, body: Bytes) -> Response {
    reply(parse_body(&body).and_then(|req| {
        let c = engine::check_value(&req["document"], &state.catalog)?;
        let overrides = engine::parse_overrides(&req["overrides"])?;
        Ok(engine::eval_json(&engine::evaluate(&c.document, &overrides, &state.catalog)?))
    }))
}

async fn registry(State(state): State<Shared>) -> Response {
    json_response(StatusCode::OK, &engine::registry_json(&state.catalog))
}

async fn list_sessions(State(state): State<Shared>) -> Response {
    let mut ids: Vec<String> = state.sessions().keys().cloned().collect();
    ids.sort();
    json_response(StatusCode::OK, &json!({"schema_version": SCHEMA_VERSION, "sessions": ids}))
}

/// Applies the optional `document` and `overrides` fields of a session request.
fn apply_update(state: &AppState, s: &mut Session, req: &Value) -> Result<(), ApiError> {
    if !req["document"].is_null() {
        s.document = engine::check_value(&req["document"], &state.catalog)?.document.canonical();
        s.overrides.clear();
    }
    if !req["overrides"].is_null() {
        let o = engine::parse_overrides(&req["overrides"])?;
        engine::evaluate(&s.document, &o, &state.catalog)?;
        s.overrides = o;
    }
    Ok(())
}

async fn create_session(State(state): State<Shared>, body: Bytes) -> Response {
    let r = parse_body(&body).and_then(|req| {
        let mut s = Session {
            id: uuid::Uuid::new_v4().to_string(),
            document: ScriptDocument::default(),
            overrides: BTreeMap::new(),
            transcripts: Vec::new(),
        };
        apply_update(&state, &mut s, &req)?;
        let v = s.to_json();
        state.sessions().insert(s.id.clone(), s);
        Ok(v)
    });
    match r {
        Ok(v) => json_response(StatusCode::CREATED, &v),
        Err(e) => error_response(&e),
    }
}

async fn get_session(State(state): State<Shared>, Path(id): Path<String>) -> Response {
    reply(state.session(&id).map(|s| s.to_json()))
}

async fn update_session(State(state): State<Shared>, Path(id): Path<String>, body: Bytes) -> Response {
    reply(parse_body(&body).and_then(|req| {
        let mut s = state.session(&id)?;
        apply_update(&state, &mut s, &req)?;
        let v = s.to_json();
        state.sessions().insert(id, s);
        Ok(v)
    }))
}

async fn delete_session(State(state): State<Shared>, Path(id): Path<String>) -> Response {
    reply(match state.sessions().remove(&id) {
        Some(_) => Ok(json!({"schema_version": SCHEMA_VERSION, "deleted": id})),
        None => Err(not_found(format!("no session `{id}`"))),
    })
}

/// Evaluates the session document. Overrides in the request are merged into the session's.
async fn evaluate_session(State(state): State<Shared>, Path(id): Path<String>, body: Bytes) -> Response {
    reply(parse_body(&body).and_then(|req| {
        let mut s = state.session(&id)?;
        s.overrides.extend(engine::parse_overrides(&req["overrides"])?);
        let result = engine::evaluate(&s.document, &s.overrides, &state.catalog)?;
        if let Some(live) = state.sessions().get_mut(&id) {
            live.overrides = s.overrides;
        }
        Ok(engine::eval_json(&result))
    }))
}
