#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use sessionlens_core::embed::EmbedParams;
use sessionlens_core::ingest::load_dataset;
use sessionlens_core::synthgen::{generate, GeneratorSpec, GroundTruth};
use sessionlens_service::{router, AppState, ServiceConfig};
use tempfile::TempDir;
use tower::ServiceExt;

pub struct Fixture {
    pub dir: TempDir,
    pub state: Arc<AppState>,
    pub truth: GroundTruth,
}

pub fn fixture(spec: &GeneratorSpec) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let truth = generate(spec, dir.path()).unwrap();
    let config = ServiceConfig {
        data_root: dir.path().to_path_buf(),
        embed: EmbedParams::default(),
    };
    let dataset = load_dataset(dir.path()).unwrap();
    Fixture {
        dir,
        state: Arc::new(AppState::new(config, dataset)),
        truth,
    }
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: axum::http::HeaderMap,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("not JSON ({e}): {}", String::from_utf8_lossy(&self.body)))
    }
}

pub async fn send(state: &Arc<AppState>, request: Request<Body>) -> Reply {
    let response = router(Arc::clone(state)).oneshot(request).await.unwrap();
    let status = response.status();
    let headers = response.headers().clone();
    let body = response.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, headers, body }
}

pub async fn get(state: &Arc<AppState>, uri: &str) -> Reply {
    send(state, Request::builder().uri(uri).body(Body::empty()).unwrap()).await
}

pub async fn post_json(state: &Arc<AppState>, uri: &str, body: &serde_json::Value) -> Reply {
    let request = Request::builder()
        .method(Method::POST)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    send(state, request).await
}

/// True when every number in `v` is finite.
pub fn all_finite(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Number(n) => n.as_f64().is_some_and(f64::is_finite),
        serde_json::Value::Array(items) => items.iter().all(all_finite),
        serde_json::Value::Object(map) => map.values().all(all_finite),
        _ => true,
    }
}
