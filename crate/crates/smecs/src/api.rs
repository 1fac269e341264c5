//! HTTP+JSON API over curation sessions.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Body;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use smecs_core::pipeline::extract;
use smecs_core::{
    export_codemeta, filter_vocabulary, parse_codemeta, parse_repo_url, AuthToken, CurationError, ExportError,
    FieldEdit, HarvestError, HttpTransport, ParseError, PipelineConfig, Session, Violation, VocabularyKind,
    VocabularySet,
};
use tower_http::services::ServeDir;

use crate::store::{new_id, SessionStore};

pub fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

pub type Transport = Arc<dyn HttpTransport + Send + Sync>;

/// Everything the handlers share.
pub struct AppState {
    pub store: SessionStore,
    pub pipeline: PipelineConfig,
    pub vocab: VocabularySet,
    pub transport: Transport,
    pub default_token: Option<String>,
    /// Hosts accepted for repository URLs; empty accepts any.
    pub allowed_hosts: Vec<String>,
    pub clock: fn() -> u64,
}

impl AppState {
    pub fn new(store: SessionStore, pipeline: PipelineConfig, vocab: VocabularySet, transport: Transport) -> Self {
        AppState {
            store,
            pipeline,
            vocab,
            transport,
            default_token: None,
            allowed_hosts: vec!["github.com".into()],
            clock: now_ms,
        }
    }
}

/// An error response: `{"error": message, "code": code, "detail": ...}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
    pub retry_after: Option<u64>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into(), detail: Value::Null, retry_after: None }
    }

    fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    fn unknown_session(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "unknown-session", format!("no session `{id}`"))
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    /// Maps a harvest failure; `token` scrubs its value from the message.
    pub fn from_harvest(e: &HarvestError, token: &AuthToken) -> Self {
        let message = token.redact(&e.to_string());
        let (status, code) = match e {
            HarvestError::UnsupportedUrl(_) => (StatusCode::BAD_REQUEST, "unsupported-url"),
            HarvestError::UnsupportedHost(_) => (StatusCode::BAD_REQUEST, "unsupported-host"),
            HarvestError::Auth { .. } => (StatusCode::UNAUTHORIZED, "auth-required"),
            HarvestError::NotFound(_) => (StatusCode::NOT_FOUND, "not-found"),
            HarvestError::RateLimited { .. } => (StatusCode::TOO_MANY_REQUESTS, "rate-limited"),
            HarvestError::Transport(_) => (StatusCode::BAD_GATEWAY, "transport-error"),
            HarvestError::Decode(_) | HarvestError::Status { .. } => (StatusCode::BAD_GATEWAY, "upstream-error"),
        };
        let mut err = ApiError::new(status, code, message);
        match e {
            HarvestError::RateLimited { retry_after } => {
                err.retry_after = *retry_after;
                err.detail = json!({ "retryAfter": retry_after });
            }
            HarvestError::Auth { status, token_supplied } => {
                err.detail = json!({ "upstreamStatus": status, "tokenSupplied": token_supplied });
            }
            _ => {}
        }
        err
    }
}

impl From<CurationError> for ApiError {
    fn from(e: CurationError) -> Self {
        let (status, code) = match &e {
            CurationError::UnknownField(_) => (StatusCode::BAD_REQUEST, "unknown-field"),
            CurationError::BadValue { .. } => (StatusCode::BAD_REQUEST, "bad-value"),
            CurationError::NoSuchPerson(_) => (StatusCode::BAD_REQUEST, "no-such-person"),
            CurationError::InvariantViolation(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invariant-violation"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<ParseError> for ApiError {
    fn from(e: ParseError) -> Self {
        let err = ApiError::new(StatusCode::BAD_REQUEST, "malformed-json", e.to_string());
        match e {
            ParseError::MalformedJson { line, column, .. } => err.with_detail(json!({"line": line, "column": column})),
            ParseError::NotAnObject => err,
        }
    }
}

impl From<ExportError> for ApiError {
    fn from(e: ExportError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "missing-name", e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad-request", e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.message, "code": self.code, "detail": self.detail });
        let mut response = (self.status, Json(body)).into_response();
        if let Some(secs) = self.retry_after {
            response.headers_mut().insert(header::RETRY_AFTER, HeaderValue::from(secs));
        }
        response
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// A session as the UI sees it.
#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SessionView<'a> {
    #[serde(flatten)]
    session: &'a Session,
    violations: Vec<Violation>,
    /// Current export text; absent while the record has no name.
    codemeta: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    import_violations: Vec<Violation>,
}

fn view(state: &AppState, session: &Session, import_violations: Vec<Violation>) -> Json<Value> {
    let view = SessionView {
        session,
        violations: session.violations(&state.vocab),
        codemeta: export_codemeta(&session.record).ok(),
        import_violations,
    };
    Json(serde_json::to_value(view).expect("session views serialize"))
}

fn persist(state: &AppState, session: &Session) -> ApiResult<()> {
    state.store.persist(session).map_err(|e| {
        log::error!("cannot persist session {}: {e}", session.id);
        ApiError::internal("cannot persist session")
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    url: String,
    #[serde(default)]
    token: Option<String>,
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Result<Json<CreateRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let Json(req) = body?;
    let token = AuthToken::resolve(req.token.as_deref(), state.default_token.as_deref());
    let locator = parse_repo_url(&req.url).map_err(|e| ApiError::from_harvest(&e, &token))?;
    if !state.allowed_hosts.is_empty() && !state.allowed_hosts.iter().any(|h| h.eq_ignore_ascii_case(&locator.host)) {
        let e = HarvestError::UnsupportedHost(locator.host.clone());
        return Err(ApiError::from_harvest(&e, &token));
    }
    log::info!("extracting {locator} (token: {:?})", token.origin());
    let worker = state.clone();
    let (loc, tok) = (locator.clone(), token.clone());
    let extraction = tokio::task::spawn_blocking(move || extract(&loc, &tok, &*worker.transport, &worker.pipeline))
        .await
        .map_err(|_| ApiError::internal("extraction task failed"))?
        .map_err(|e| {
            let err = ApiError::from_harvest(&e, &token);
            log::warn!("extraction of {locator} failed: {}", err.message);
            err
        })?;
    let now = (state.clock)();
    let session = Session::from_extraction(new_id(), locator, extraction, now);
    let shared = state.store.insert(session, now).map_err(|e| {
        log::error!("cannot persist new session: {e}");
        ApiError::internal("cannot persist session")
    })?;
    let session = shared.lock().unwrap_or_else(|e| e.into_inner());
    log::info!("session {} created", session.id);
    Ok((StatusCode::CREATED, view(&state, &session, Vec::new())))
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let shared = state.store.get(&id, (state.clock)()).ok_or_else(|| ApiError::unknown_session(&id))?;
    let session = shared.lock().unwrap_or_else(|e| e.into_inner());
    Ok(view(&state, &session, Vec::new()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EditRequest {
    path: String,
    #[serde(default)]
    value: Value,
}

async fn update_field(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<EditRequest>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Json(req) = body?;
    let now = (state.clock)();
    let shared = state.store.get(&id, now).ok_or_else(|| ApiError::unknown_session(&id))?;
    let edit = FieldEdit::parse(&req.path, &req.value)?;
    let mut session = shared.lock().unwrap_or_else(|e| e.into_inner());
    session.apply_edit(edit, now, &state.pipeline.review_fields)?;
    persist(&state, &session)?;
    Ok(view(&state, &session, Vec::new()))
}

#[derive(Deserialize)]
struct ImportQuery {
    session: Option<String>,
}

async fn import_metadata(
    State(state): State<Arc<AppState>>,
    Query(query): Query<ImportQuery>,
    body: String,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let parsed = parse_codemeta(&body)?;
    let now = (state.clock)();
    let review = &state.pipeline.review_fields;
    match query.session {
        Some(id) => {
            let shared = state.store.get(&id, now).ok_or_else(|| ApiError::unknown_session(&id))?;
            let mut session = shared.lock().unwrap_or_else(|e| e.into_inner());
            session.overlay_import(parsed.record, now, review);
            persist(&state, &session)?;
            Ok((StatusCode::OK, view(&state, &session, parsed.violations)))
        }
        None => {
            let session = Session::from_import(new_id(), parsed.record, now, review);
            let shared = state.store.insert(session, now).map_err(|e| {
                log::error!("cannot persist imported session: {e}");
                ApiError::internal("cannot persist session")
            })?;
            let session = shared.lock().unwrap_or_else(|e| e.into_inner());
            Ok((StatusCode::CREATED, view(&state, &session, parsed.violations)))
        }
    }
}

async fn export_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let shared = state.store.get(&id, (state.clock)()).ok_or_else(|| ApiError::unknown_session(&id))?;
    let text = export_codemeta(&shared.lock().unwrap_or_else(|e| e.into_inner()).record)?;
    Ok((
        [
            (header::CONTENT_TYPE, "application/json"),
            (header::CONTENT_DISPOSITION, "attachment; filename=\"codemeta.json\""),
        ],
        Body::from(text),
    )
        .into_response())
}

#[derive(Deserialize)]
struct VocabQuery {
    #[serde(default)]
    q: String,
    limit: Option<usize>,
}

pub const DEFAULT_VOCAB_LIMIT: usize = 20;
pub const MAX_VOCAB_LIMIT: usize = 1000;

async fn vocabulary(
    State(state): State<Arc<AppState>>,
    Path(kind): Path<String>,
    Query(query): Query<VocabQuery>,
) -> ApiResult<Json<Value>> {
    let kind = match kind.as_str() {
        "licenses" => VocabularyKind::License,
        "languages" => VocabularyKind::Language,
        other => {
            return Err(ApiError::new(StatusCode::NOT_FOUND, "unknown-vocabulary", format!("no vocabulary `{other}`")))
        }
    };
    let limit = query.limit.unwrap_or(DEFAULT_VOCAB_LIMIT);
    if limit == 0 || limit > MAX_VOCAB_LIMIT {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "bad-request",
            format!("limit must be between 1 and {MAX_VOCAB_LIMIT}"),
        ));
    }
    let entries = filter_vocabulary(state.vocab.get(kind), &query.q, limit);
    Ok(Json(json!({ "query": query.q, "entries": entries })))
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Value> {
    Json(json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION"), "sessions": state.store.len() }))
}

const PLACEHOLDER_INDEX: &str = "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>smecs</title></head>\
<body><h1>smecs</h1><p>The curation UI is not installed. Set <code>ui_dir</code> to serve it here. \
The API lives under <a href=\"/api/health\">/api</a>.</p></body></html>\n";

async fn unknown_api() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not-found", "no such endpoint")
}

pub fn router(state: Arc<AppState>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/import", post(import_metadata))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/fields", patch(update_field))
        .route("/sessions/{id}/export", get(export_session))
        .route("/vocab/{kind}", get(vocabulary))
        .route("/health", get(health))
        .fallback(unknown_api);
    let router = Router::new().nest("/api", api);
    let router = match ui_dir {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router.route("/", get(|| async { Html(PLACEHOLDER_INDEX) })),
    };
    router.with_state(state)
}

/// Runs the service until Ctrl-C.
pub async fn serve(state: Arc<AppState>, listen: &str, ui_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(listen).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    let purger = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(std::time::Duration::from_secs(60));
        loop {
            tick.tick().await;
            let n = purger.store.purge_expired((purger.clock)());
            if n > 0 {
                log::info!("expired {n} idle session(s)");
            }
        }
    });
    axum::serve(listener, router(state, ui_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
