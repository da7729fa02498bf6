//! HTTP/JSON session service.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use stml::engine::{EngineError, StepRecord};
use stml::lang::rules::RuleSet;
use stml::oracle::{IsFinalRequest, IsFinalResponse, Oracle, OracleDecision, SelectRequest};
use stml::session::{ApplyRequest, Export, MatchView, Session, SessionError, StateView};

use crate::commands::{load_program, CliError};

pub struct AppState {
    rules: RuleSet,
    oracle: Mutex<Box<dyn Oracle + Send>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next: AtomicU64,
}

impl AppState {
    pub fn new(rules: RuleSet, oracle: Box<dyn Oracle + Send>) -> Arc<Self> {
        Arc::new(AppState {
            rules,
            oracle: Mutex::new(oracle),
            sessions: RwLock::new(HashMap::new()),
            next: AtomicU64::new(1),
        })
    }
}

pub struct ApiError(StatusCode, CliError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match &e {
            SessionError::UnknownMatch(_) => StatusCode::NOT_FOUND,
            SessionError::Engine(EngineError::StaleMatch { .. }) => StatusCode::CONFLICT,
            SessionError::Engine(
                EngineError::UnsafeApplication { .. } | EngineError::EmptyHistory,
            ) => StatusCode::BAD_REQUEST,
            SessionError::Engine(EngineError::Replace(_)) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, CliError::new(e.kind(), e))
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Clone, Deserialize)]
pub struct CreateSession {
    pub code: String,
    /// Sidecar fact file contents.
    #[serde(default)]
    pub properties: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HistoryView {
    pub initial_digest: String,
    pub steps: Vec<StepRecord>,
}

fn session(st: &AppState, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
    st.sessions.read().unwrap().get(id).cloned().ok_or_else(|| {
        ApiError(
            StatusCode::NOT_FOUND,
            CliError::new("UnknownSession", format!("no session `{id}`")),
        )
    })
}

async fn create(
    State(st): State<Arc<AppState>>,
    Json(req): Json<CreateSession>,
) -> Result<(StatusCode, Json<StateView>), ApiError> {
    let (ast, warnings) = load_program(&req.code, req.properties.as_deref())
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, e))?;
    let id = format!("s{}", st.next.fetch_add(1, Ordering::SeqCst));
    let s = Session::new(id.clone(), ast, st.rules.clone(), warnings);
    let view = s.state();
    st.sessions
        .write()
        .unwrap()
        .insert(id, Arc::new(Mutex::new(s)));
    Ok((StatusCode::CREATED, Json(view)))
}

async fn state(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<StateView> {
    Ok(Json(session(&st, &id)?.lock().unwrap().state()))
}

async fn matches(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Vec<MatchView>> {
    Ok(Json(session(&st, &id)?.lock().unwrap().match_views()))
}

async fn apply(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<ApplyRequest>,
) -> ApiResult<StepRecord> {
    Ok(Json(session(&st, &id)?.lock().unwrap().apply(&req)?))
}

async fn undo(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<StateView> {
    Ok(Json(session(&st, &id)?.lock().unwrap().undo()?))
}

async fn history(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<HistoryView> {
    let s = session(&st, &id)?;
    let s = s.lock().unwrap();
    Ok(Json(HistoryView {
        initial_digest: stml::engine::digest(s.history().initial()),
        steps: s.history().steps().to_vec(),
    }))
}

async fn export(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Export> {
    Ok(Json(session(&st, &id)?.lock().unwrap().export()))
}

fn oracle_failure(e: impl ToString) -> ApiError {
    ApiError(
        StatusCode::UNPROCESSABLE_ENTITY,
        CliError::new("OracleFailure", e.to_string()),
    )
}

async fn select(
    State(st): State<Arc<AppState>>,
    Json(req): Json<SelectRequest>,
) -> ApiResult<OracleDecision> {
    tokio::task::spawn_blocking(move || {
        let cands = req
            .candidates()
            .map_err(|e| ApiError(StatusCode::BAD_REQUEST, CliError::new(e.kind(), e)))?;
        let d = st
            .oracle
            .lock()
            .unwrap()
            .select_rule(&st.rules, &cands)
            .map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, CliError::new(e.kind(), e)))?;
        Ok(Json(d))
    })
    .await
    .map_err(oracle_failure)?
}

async fn is_final(
    State(st): State<Arc<AppState>>,
    Json(req): Json<IsFinalRequest>,
) -> ApiResult<IsFinalResponse> {
    tokio::task::spawn_blocking(move || {
        let ast = stml::c::parser::parse_c(&req.code)
            .map_err(|e| ApiError(StatusCode::BAD_REQUEST, CliError::new(e.kind(), e)))?;
        let f = st
            .oracle
            .lock()
            .unwrap()
            .is_final(&st.rules, &ast)
            .map_err(oracle_failure)?;
        Ok(Json(IsFinalResponse { is_final: f }))
    })
    .await
    .map_err(oracle_failure)?
}

pub fn router(st: Arc<AppState>) -> Router {
    Router::new()
        .route("/session", post(create))
        .route("/session/{id}/state", get(state))
        .route("/session/{id}/matches", get(matches))
        .route("/session/{id}/apply", post(apply))
        .route("/session/{id}/undo", post(undo))
        .route("/session/{id}/history", get(history))
        .route("/session/{id}/export", post(export))
        .route("/oracle/select", post(select))
        .route("/oracle/is_final", post(is_final))
        .with_state(st)
}

pub async fn serve(listener: tokio::net::TcpListener, st: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(st)).await
}
