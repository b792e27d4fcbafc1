//! HTTP facade: `POST /v1/render`, `GET /v1/presets`, `GET /healthz`.
//!
//! Renders run on the blocking pool behind a semaphore, one permit per
//! worker. Responses depend only on the request body, so identical requests
//! get identical bytes.

mod request;

pub use request::{AnalysisFlags, RenderJob, RenderRequest, RequestError};

use std::future::Future;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::Semaphore;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use harmonia_core::presets::catalog;
use harmonia_core::SCHEMA_VERSION;

pub const DEFAULT_MAX_DURATION: f64 = 30.0;
pub const MULTIPART_BOUNDARY: &str = "harmonia-render-part";
const MAX_BODY_BYTES: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Longest scene (seconds) a request may ask for.
    pub max_duration: f64,
    /// Concurrent renders.
    pub workers: usize,
    /// Allowed CORS origins; empty allows any.
    pub cors_origins: Vec<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            max_duration: DEFAULT_MAX_DURATION,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            cors_origins: Vec::new(),
        }
    }
}

#[derive(Clone)]
struct AppState {
    config: Arc<ServiceConfig>,
    permits: Arc<Semaphore>,
}

pub fn router(config: ServiceConfig) -> Router {
    let cors = if config.cors_origins.is_empty() {
        CorsLayer::new().allow_origin(Any)
    } else {
        let origins: Vec<HeaderValue> = config
            .cors_origins
            .iter()
            .filter_map(|o| HeaderValue::from_str(o).ok())
            .collect();
        CorsLayer::new().allow_origin(AllowOrigin::list(origins))
    }
    .allow_methods([Method::GET, Method::POST])
    .allow_headers([header::CONTENT_TYPE]);

    let state = AppState {
        permits: Arc::new(Semaphore::new(config.workers.max(1))),
        config: Arc::new(config),
    };
    Router::new()
        .route("/healthz", get(healthz))
        .route("/v1/presets", get(presets))
        .route("/v1/render", post(render))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .layer(cors)
        .with_state(state)
}

/// Serves until `shutdown` resolves, then lets in-flight requests finish.
pub async fn serve(
    listener: TcpListener,
    config: ServiceConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(config))
        .with_graceful_shutdown(shutdown)
        .await
}

async fn healthz() -> Json<serde_json::Value> {
    Json(json!({
        "status": "ok",
        "name": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": SCHEMA_VERSION,
    }))
}

async fn presets() -> Response {
    Json(catalog()).into_response()
}

fn error_response(err: RequestError) -> Response {
    let status = match &err {
        RequestError::Schema(_) => StatusCode::BAD_REQUEST,
        RequestError::TooLong { .. } => StatusCode::PAYLOAD_TOO_LARGE,
        RequestError::Parameter { .. } => StatusCode::UNPROCESSABLE_ENTITY,
        RequestError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
    };
    let mut body = json!({ "error": err.kind(), "message": err.to_string() });
    if let RequestError::Parameter { field, .. } = &err {
        body["field"] = json!(field);
    }
    (status, Json(body)).into_response()
}

/// `multipart/mixed` body with the analysis JSON first and the WAV second.
pub fn multipart_body(analysis_json: &[u8], wav: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(analysis_json.len() + wav.len() + 512);
    let part = |out: &mut Vec<u8>, name: &str, content_type: &str, data: &[u8]| {
        out.extend_from_slice(
            format!(
                "--{MULTIPART_BOUNDARY}\r\nContent-Type: {content_type}\r\nContent-Disposition: inline; name=\"{name}\"\r\nContent-Length: {}\r\n\r\n",
                data.len()
            )
            .as_bytes(),
        );
        out.extend_from_slice(data);
        out.extend_from_slice(b"\r\n");
    };
    part(&mut out, "analysis", "application/json", analysis_json);
    part(&mut out, "audio", "audio/wav", wav);
    out.extend_from_slice(format!("--{MULTIPART_BOUNDARY}--\r\n").as_bytes());
    out
}

async fn render(State(state): State<AppState>, body: Bytes) -> Response {
    let job = match RenderRequest::parse(&body).and_then(|r| r.resolve(state.config.max_duration)) {
        Ok(job) => job,
        Err(e) => return error_response(e),
    };
    let Ok(_permit) = state.permits.clone().acquire_owned().await else {
        return error_response(RequestError::Internal("worker pool closed".into()));
    };
    let result = tokio::task::spawn_blocking(move || job.run()).await;
    match result {
        Ok(Ok((analysis, wav))) => Response::builder()
            .status(StatusCode::OK)
            .header(
                header::CONTENT_TYPE,
                format!("multipart/mixed; boundary={MULTIPART_BOUNDARY}"),
            )
            .body(Body::from(multipart_body(&analysis, &wav)))
            .expect("static response parts"),
        Ok(Err(e)) => error_response(e),
        Err(e) => error_response(RequestError::Internal(e.to_string())),
    }
}
