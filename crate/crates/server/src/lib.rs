//! HTTP front end for interactive sessions.
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/api/sessions` | session config |
//! | GET | `/api/sessions/{id}` | |
//! | POST | `/api/sessions/{id}/feedback` | `{"step", "kind": "accept"}` or `{"step", "kind": "correct", "component", "value"}` |
//! | GET | `/api/sessions/{id}/transcript` | |
//! | GET | `/api/spaces` | |
//!
//! Errors come back as `{"error": code, "detail": text}`.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use partial_correction::session::{
    available_spaces, FeedbackRequest, SessionConfig, SessionError, SessionStore, SessionView,
    SpaceOffer,
};
use serde::Serialize;
use tower_http::services::ServeDir;

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    detail: String,
}

/// Error response with a stable code.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        Self {
            status: StatusCode::from_u16(e.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR),
            body: ErrorBody {
                error: e.code().into(),
                detail: e.to_string(),
            },
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: ErrorBody {
                error: "invalid-body".into(),
                detail: e.body_text(),
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

async fn create(
    State(store): State<Arc<SessionStore>>,
    body: Result<Json<SessionConfig>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let Json(config) = body?;
    Ok((StatusCode::CREATED, Json(store.create(config)?)))
}

async fn view(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> ApiResult<SessionView> {
    Ok(Json(store.view(&id)?))
}

async fn feedback(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Result<Json<FeedbackRequest>, JsonRejection>,
) -> ApiResult<SessionView> {
    // Unknown ids take precedence over malformed bodies.
    store.view(&id)?;
    let Json(request) = body?;
    Ok(Json(store.submit(&id, request)?))
}

async fn transcript(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let text = store.export(&id)?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

async fn spaces() -> Json<Vec<SpaceOffer>> {
    Json(available_spaces())
}

/// Builds the router. Static files, if any, are served from `static_dir`.
pub fn router(store: Arc<SessionStore>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/sessions", post(create))
        .route("/api/sessions/{id}", get(view))
        .route("/api/sessions/{id}/feedback", post(feedback))
        .route("/api/sessions/{id}/transcript", get(transcript))
        .route("/api/spaces", get(spaces))
        .with_state(store);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub addr: SocketAddr,
    pub static_dir: Option<PathBuf>,
    /// Append each session's transcript to `<dir>/<id>.jsonl`.
    pub journal_dir: Option<PathBuf>,
}

/// Runs the service until the process is stopped.
pub async fn serve(options: ServeOptions) -> std::io::Result<()> {
    let store = match options.journal_dir {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            SessionStore::with_journal(dir)
        }
        None => SessionStore::new(),
    };
    let app = router(Arc::new(store), options.static_dir);
    let listener = tokio::net::TcpListener::bind(options.addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await
}
