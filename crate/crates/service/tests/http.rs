use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use harmonia_core::analysis::AnalysisReport;
use harmonia_core::presets::Catalog;
use harmonia_service::{router, ServiceConfig, MULTIPART_BOUNDARY};

fn app() -> axum::Router {
    router(ServiceConfig {
        workers: 2,
        ..ServiceConfig::default()
    })
}

async fn send(req: Request<Body>) -> (StatusCode, Option<String>, Vec<u8>) {
    let res = app().oneshot(req).await.unwrap();
    let status = res.status();
    let ctype = res
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_string());
    let body = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, ctype, body)
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn render(body: Value) -> Request<Body> {
    Request::post("/v1/render")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_string()))
        .unwrap()
}

/// Splits the multipart/mixed body into (name, bytes) parts.
fn parts(body: &[u8]) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut rest = body;
    let delim = format!("--{MULTIPART_BOUNDARY}\r\n");
    while rest.starts_with(delim.as_bytes()) {
        rest = &rest[delim.len()..];
        let end = rest.windows(4).position(|w| w == b"\r\n\r\n").unwrap();
        let head = std::str::from_utf8(&rest[..end]).unwrap();
        let field = |key: &str| {
            head.lines()
                .find_map(|l| l.strip_prefix(key))
                .unwrap()
                .trim()
                .to_string()
        };
        let len: usize = field("Content-Length:").parse().unwrap();
        let name = field("Content-Disposition:")
            .split("name=\"")
            .nth(1)
            .unwrap()
            .trim_end_matches('"')
            .to_string();
        let data = &rest[end + 4..end + 4 + len];
        out.push((name, data.to_vec()));
        rest = &rest[end + 4 + len + 2..];
    }
    assert_eq!(rest, format!("--{MULTIPART_BOUNDARY}--\r\n").as_bytes());
    out
}

#[tokio::test]
async fn healthz_reports_schema_version() {
    let (status, ctype, body) = send(get("/healthz")).await;
    assert_eq!(status, StatusCode::OK);
    assert!(ctype.unwrap().starts_with("application/json"));
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["status"], "ok");
    assert_eq!(v["schema_version"], harmonia_core::SCHEMA_VERSION);
}

#[tokio::test]
async fn presets_lists_catalog() {
    let (status, _, body) = send(get("/v1/presets")).await;
    assert_eq!(status, StatusCode::OK);
    let catalog: Catalog = serde_json::from_slice(&body).unwrap();
    assert!(catalog.presets.iter().any(|p| p.name == "wandering-favorite"));
    assert!(catalog.presets.iter().any(|p| p.family == "woofer-modes"));
    assert!(catalog.dials.iter().any(|d| d.name == "harmonic_variation"));
}

#[tokio::test]
async fn presets_ignores_accept_header() {
    let req = Request::get("/v1/presets")
        .header(header::ACCEPT, "text/x-unknown")
        .body(Body::empty())
        .unwrap();
    let (status, _, _) = send(req).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn render_preset_returns_analysis_and_audio() {
    let (status, ctype, body) = send(render(json!({ "preset": "woofer-mode-3", "duration": 1.0 }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ctype.unwrap(), format!("multipart/mixed; boundary={MULTIPART_BOUNDARY}"));
    let p = parts(&body);
    assert_eq!(p[0].0, "analysis");
    assert_eq!(p[1].0, "audio");
    let report = AnalysisReport::from_json(std::str::from_utf8(&p[0].1).unwrap()).unwrap();
    assert!(report.lines.iter().any(|l| l.harmonic_index == 3));
    assert_eq!(&p[1].1[..4], b"RIFF");
    assert!(report.spectrogram.is_none());
}

#[tokio::test]
async fn overlay_flag_includes_spectrogram() {
    let (status, _, body) = send(render(json!({
        "preset": "pure-sine",
        "duration": 0.5,
        "analysis": { "overlay": true }
    })))
    .await;
    assert_eq!(status, StatusCode::OK);
    let p = parts(&body);
    let report = AnalysisReport::from_json(std::str::from_utf8(&p[0].1).unwrap()).unwrap();
    assert!(report.spectrogram.is_some());
}

#[tokio::test]
async fn invalid_parameter_is_422_with_field() {
    let (status, _, body) = send(render(json!({
        "preset": "full-series",
        "params": { "harmonic_variation": 0.0 }
    })))
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["field"], "params.harmonic_variation");
}

#[tokio::test]
async fn overlong_duration_is_413() {
    let (status, _, body) = send(render(json!({ "preset": "full-series", "duration": 3600.0 }))).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["error"], "duration");
}

#[tokio::test]
async fn malformed_requests_are_400() {
    let bad = Request::post("/v1/render").body(Body::from("{not json")).unwrap();
    assert_eq!(send(bad).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(send(render(json!({}))).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(send(render(json!({ "preset": "pure-sine", "colour": 1 }))).await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unknown_preset_is_422() {
    let (status, _, body) = send(render(json!({ "preset": "nope" }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["field"], "preset");
}

#[tokio::test]
async fn identical_requests_give_identical_bytes() {
    let req = || render(json!({ "preset": "inharmonic", "duration": 0.5, "seed": 11, "format": "pcm16" }));
    let (_, _, a) = send(req()).await;
    let (_, _, b) = send(req()).await;
    assert_eq!(a, b);
}

#[tokio::test]
async fn cors_preflight_is_answered() {
    let req = Request::options("/v1/render")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .body(Body::empty())
        .unwrap();
    let res = app().oneshot(req).await.unwrap();
    assert!(res.headers().contains_key(header::ACCESS_CONTROL_ALLOW_ORIGIN));
}
