//! HTTP front end.
//!
//! `POST /classify` takes either `{"dim": N, "components": [...]}` as JSON or
//! raw PNG/JPEG bytes (toy-embedded), with an optional `?mode=` override.
//! `GET /health` reports collection generations and ledger chain status.

use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;

use super::{ClassifyResponse, Engine, EngineError, FrameworkMode};
use crate::classifier::ClassifyError;
use crate::interchange::{toy_embed, EmbeddingVector, InterchangeError};
use crate::ledger::LedgerError;
use crate::vecstore::StoreError;

const MAX_BODY: usize = 32 << 20;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorBody {
    dim: usize,
    components: Vec<f32>,
}

#[derive(Debug, Deserialize)]
struct ModeQuery {
    mode: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code.to_string(),
            message: self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        use StatusCode as S;
        let (status, code) = match &e {
            EngineError::Interchange(InterchangeError::ZeroVector)
            | EngineError::Ledger(LedgerError::ZeroVector)
            | EngineError::Store(StoreError::ZeroVector)
            | EngineError::Classify(ClassifyError::Store(StoreError::ZeroVector)) => {
                (S::UNPROCESSABLE_ENTITY, "zero_vector")
            }
            EngineError::Store(StoreError::DimensionMismatch { .. })
            | EngineError::Classify(ClassifyError::Store(StoreError::DimensionMismatch { .. })) => {
                (S::UNPROCESSABLE_ENTITY, "dimension_mismatch")
            }
            EngineError::Interchange(InterchangeError::BlackImage | InterchangeError::EmptyImage) => {
                (S::UNPROCESSABLE_ENTITY, "unembeddable_image")
            }
            EngineError::Interchange(_) | EngineError::InvalidInput(_) => {
                (S::UNPROCESSABLE_ENTITY, "invalid_input")
            }
            EngineError::Classify(ClassifyError::NotDeterminable(_)) => {
                (S::SERVICE_UNAVAILABLE, "not_determinable")
            }
            _ => (S::INTERNAL_SERVER_ERROR, "internal"),
        };
        if status.is_server_error() {
            log::error!("classify failed: {e}");
        }
        ApiError::new(status, code, e.to_string())
    }
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/classify", post(classify))
        .route("/health", get(health))
        .layer(DefaultBodyLimit::max(MAX_BODY))
        .with_state(engine)
}

/// Serves on `listener` until `shutdown` resolves.
pub async fn serve(
    engine: Arc<Engine>,
    listener: TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(engine))
        .with_graceful_shutdown(shutdown)
        .await
}

fn parse_body(headers: &HeaderMap, body: &[u8]) -> Result<EmbeddingVector, ApiError> {
    let content_type = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("")
        .split(';')
        .next()
        .unwrap_or("")
        .trim()
        .to_ascii_lowercase();
    match content_type.as_str() {
        "application/json" => {
            let req: VectorBody = serde_json::from_slice(body).map_err(|e| {
                ApiError::new(StatusCode::BAD_REQUEST, "malformed_body", e.to_string())
            })?;
            if req.dim != req.components.len() {
                return Err(ApiError::new(
                    StatusCode::BAD_REQUEST,
                    "malformed_body",
                    format!("dim is {} but {} components given", req.dim, req.components.len()),
                ));
            }
            EmbeddingVector::new(req.components).map_err(|e| EngineError::from(e).into())
        }
        "image/png" | "image/jpeg" | "application/octet-stream" => {
            let img = image::load_from_memory(body).map_err(|e| {
                ApiError::new(StatusCode::BAD_REQUEST, "undecodable_image", e.to_string())
            })?;
            toy_embed(&img.to_rgb8()).map_err(|e| EngineError::from(e).into())
        }
        other => Err(ApiError::new(
            StatusCode::UNSUPPORTED_MEDIA_TYPE,
            "unsupported_media_type",
            format!("content type {other:?} is not application/json, image/png or image/jpeg"),
        )),
    }
}

async fn classify(
    State(engine): State<Arc<Engine>>,
    Query(q): Query<ModeQuery>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<ClassifyResponse>, ApiError> {
    let mode = match q.mode {
        Some(m) => m
            .parse::<FrameworkMode>()
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_mode", e.to_string()))?,
        None => engine.config().mode,
    };
    let v = parse_body(&headers, &body)?;
    let resp = tokio::task::spawn_blocking(move || engine.classify_with(&v, mode))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(resp))
}

async fn health(State(engine): State<Arc<Engine>>) -> Response {
    match tokio::task::spawn_blocking(move || engine.health()).await {
        Ok(Ok(h)) => {
            let status = if h.is_ok() {
                StatusCode::OK
            } else {
                StatusCode::SERVICE_UNAVAILABLE
            };
            (status, Json(h)).into_response()
        }
        Ok(Err(e)) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
            .into_response(),
        Err(e) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
            .into_response(),
    }
}
