use std::str::FromStr;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, Request, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sessionlens_core::analytics::{self, ErrorContribution, GroupAggregate, GroupBy, ProcedureSummary, StateProportions};
use sessionlens_core::embed::{EmbedParams, StreamKind};
use sessionlens_core::model::{SensorKind, Session, WorkloadCategory};
use sessionlens_core::query::{self, SessionFilter, DEFAULT_MAX_POINTS};
use tower_http::services::ServeFile;

use crate::{ApiError, ApiResult, AppState, Snapshot};

const MAX_SHAPELETS: usize = 1024;
const MAX_SERIES_LEN: usize = 4096;
const MAX_SLICE_POINTS: usize = 100_000;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/sessions", get(sessions))
        .route("/api/quality", get(quality))
        .route("/api/embedding", get(embedding))
        .route("/api/aggregate", post(aggregate))
        .route("/api/sessions/{id}/timeline", get(timeline))
        .route("/api/sessions/{id}/matrix", get(matrix))
        .route("/api/sessions/{id}/brush", get(brush))
        .route("/api/sessions/{id}/series", get(series))
        .route("/api/sessions/{id}/video", get(video))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .with_state(state)
}

fn query_params<T>(q: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    q.map(|Query(v)| v).map_err(|e| ApiError::bad_request(e.body_text()))
}

fn parse<T: FromStr<Err = String>>(name: &str, value: Option<&str>, default: T) -> ApiResult<T> {
    match value.filter(|v| !v.is_empty()) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|e: String| ApiError::bad_request(format!("{name}: {e}"))),
    }
}

fn number<T: FromStr>(name: &str, value: Option<&str>) -> ApiResult<Option<T>> {
    value
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse()
                .map_err(|_| ApiError::bad_request(format!("{name}: `{v}` is not a valid number")))
        })
        .transpose()
}

fn session<'a>(snapshot: &'a Snapshot, id: &str) -> ApiResult<&'a Session> {
    snapshot
        .dataset
        .session(id)
        .ok_or_else(|| ApiError::unknown_sessions(vec![id.to_string()]))
}

fn category(value: Option<&str>) -> ApiResult<WorkloadCategory> {
    parse("category", value, WorkloadCategory::Attention)
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Value> {
    let snapshot = state.snapshot();
    Json(json!({ "status": "ok", "sessions": snapshot.dataset.sessions.len() }))
}

#[derive(Deserialize)]
struct SessionsQuery {
    top_k_trials: Option<String>,
    subject: Option<String>,
    trial: Option<String>,
}

fn list(value: Option<String>) -> Option<Vec<String>> {
    value
        .filter(|v| !v.is_empty())
        .map(|v| v.split(',').map(|s| s.trim().to_string()).collect())
}

async fn sessions(
    State(state): State<Arc<AppState>>,
    q: Result<Query<SessionsQuery>, QueryRejection>,
) -> ApiResult<Json<Vec<query::SessionMeta>>> {
    let q = query_params(q)?;
    let filter = SessionFilter {
        top_k_trials: number("top_k_trials", q.top_k_trials.as_deref())?,
        subjects: list(q.subject),
        trials: list(q.trial),
    };
    Ok(Json(query::list_sessions(&state.snapshot().dataset, &filter)))
}

async fn quality(State(state): State<Arc<AppState>>) -> Json<Vec<sessionlens_core::ingest::QualityReport>> {
    Json(state.snapshot().dataset.reports.clone())
}

#[derive(Deserialize)]
struct EmbeddingQuery {
    stream: Option<String>,
    k: Option<String>,
    m: Option<String>,
    len: Option<String>,
    seed: Option<String>,
}

async fn embedding(
    State(state): State<Arc<AppState>>,
    q: Result<Query<EmbeddingQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let q = query_params(q)?;
    let kind: StreamKind = match q.stream.as_deref() {
        Some(s) => s.parse().map_err(ApiError::bad_request)?,
        None => return Err(ApiError::bad_request("stream is required (imu, gaze or fnirs)")),
    };
    let defaults = state.config.embed;
    let params = EmbedParams {
        k: number("k", q.k.as_deref())?.unwrap_or(defaults.k),
        m: number("m", q.m.as_deref())?.unwrap_or(defaults.m),
        len: number("len", q.len.as_deref())?.unwrap_or(defaults.len),
        seed: number("seed", q.seed.as_deref())?.unwrap_or(defaults.seed),
    };
    if params.k == 0 || params.k > MAX_SHAPELETS {
        return Err(ApiError::bad_request(format!("k must lie in 1..={MAX_SHAPELETS}")));
    }
    if params.len < 2 || params.len > MAX_SERIES_LEN {
        return Err(ApiError::bad_request(format!("len must lie in 2..={MAX_SERIES_LEN}")));
    }
    if params.m < 2 || params.m >= params.len {
        return Err(ApiError::bad_request("m must satisfy 2 <= m < len"));
    }
    let snapshot = state.snapshot();
    let embedding = snapshot.embedding(kind, params).await?;
    Ok(Json(&*embedding).into_response())
}

#[derive(Deserialize)]
struct SelectionRequest {
    session_ids: Vec<String>,
    group_by: GroupBy,
    #[serde(default)]
    category: Option<WorkloadCategory>,
}

#[derive(Serialize)]
struct AggregateResponse {
    category: WorkloadCategory,
    groups: Vec<GroupAggregate>,
}

async fn aggregate(
    State(state): State<Arc<AppState>>,
    body: Result<Json<SelectionRequest>, JsonRejection>,
) -> ApiResult<Json<AggregateResponse>> {
    let Json(req) = body.map_err(|e| ApiError::bad_request(e.body_text()))?;
    if req.session_ids.is_empty() {
        return Err(ApiError::bad_request("session_ids must not be empty"));
    }
    let snapshot = state.snapshot();
    let unknown: Vec<String> = req
        .session_ids
        .iter()
        .filter(|id| snapshot.dataset.session(id).is_none())
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(ApiError::unknown_sessions(unknown));
    }
    let mut ids = req.session_ids.clone();
    ids.sort();
    ids.dedup();
    let members: Vec<&Session> = ids.iter().filter_map(|id| snapshot.dataset.session(id)).collect();
    Ok(Json(AggregateResponse {
        category: req.category.unwrap_or(WorkloadCategory::Attention),
        groups: analytics::aggregate_group(&members, req.group_by),
    }))
}

#[derive(Deserialize)]
struct CategoryQuery {
    category: Option<String>,
}

async fn timeline(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<CategoryQuery>, QueryRejection>,
) -> ApiResult<Json<query::TimelineBundle>> {
    let q = query_params(q)?;
    let category = category(q.category.as_deref())?;
    let snapshot = state.snapshot();
    Ok(Json(query::build_timeline(session(&snapshot, &id)?, category)))
}

#[derive(Serialize)]
struct MatrixResponse {
    session_id: String,
    category: WorkloadCategory,
    /// Absent when the session has no procedure track.
    summary: Option<ProcedureSummary>,
    /// Fraction of the session covered by errors.
    error_proportion: Option<f64>,
    proportions: StateProportions,
    error_contribution: ErrorContribution,
}

async fn matrix(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<CategoryQuery>, QueryRejection>,
) -> ApiResult<Json<MatrixResponse>> {
    let q = query_params(q)?;
    let category = category(q.category.as_deref())?;
    let snapshot = state.snapshot();
    let s = session(&snapshot, &id)?;
    let summary = match analytics::procedure_summary(s, category, &snapshot.dataset.procedure_labels) {
        Ok(summary) => Some(summary),
        Err(sessionlens_core::Error::StreamAbsent(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let one = [s];
    let contribution = ErrorContribution(
        WorkloadCategory::ALL
            .iter()
            .map(|&c| (c, analytics::error_contribution(&one, c)))
            .collect(),
    );
    Ok(Json(MatrixResponse {
        session_id: id,
        category,
        summary,
        error_proportion: s.errors().map(|e| e.covered_duration() / s.duration_s()),
        proportions: analytics::state_proportions(&one),
        error_contribution: contribution,
    }))
}

#[derive(Deserialize)]
struct BrushQuery {
    t0: Option<String>,
    t1: Option<String>,
    category: Option<String>,
}

async fn brush(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<BrushQuery>, QueryRejection>,
) -> ApiResult<Json<query::BrushResult>> {
    let q = query_params(q)?;
    let category = category(q.category.as_deref())?;
    let snapshot = state.snapshot();
    let s = session(&snapshot, &id)?;
    let t0 = number("t0", q.t0.as_deref())?.ok_or_else(|| ApiError::bad_request("t0 is required"))?;
    let t1 = number("t1", q.t1.as_deref())?.ok_or_else(|| ApiError::bad_request("t1 is required"))?;
    Ok(Json(query::brush(s, t0, t1, category)?))
}

#[derive(Deserialize)]
struct SeriesQuery {
    stream: Option<String>,
    channel: Option<String>,
    t0: Option<String>,
    t1: Option<String>,
    max_points: Option<String>,
}

async fn series(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<SeriesQuery>, QueryRejection>,
) -> ApiResult<Json<query::SeriesSlice>> {
    let q = query_params(q)?;
    let snapshot = state.snapshot();
    let s = session(&snapshot, &id)?;
    let stream: SensorKind = match q.stream.as_deref() {
        Some(v) => v.parse().map_err(ApiError::bad_request)?,
        None => return Err(ApiError::bad_request("stream is required (imu or gaze)")),
    };
    let channel = q
        .channel
        .filter(|c| !c.is_empty())
        .ok_or_else(|| {
            ApiError::bad_request("channel is required")
                .with_detail(json!({ "valid_channels": query::valid_channels(stream) }))
        })?;
    let t0 = number("t0", q.t0.as_deref())?.unwrap_or(0.0);
    let t1 = number("t1", q.t1.as_deref())?.unwrap_or(s.duration_s());
    let max_points = number("max_points", q.max_points.as_deref())?.unwrap_or(DEFAULT_MAX_POINTS);
    if !(2..=MAX_SLICE_POINTS).contains(&max_points) {
        return Err(ApiError::bad_request(format!("max_points must lie in 2..={MAX_SLICE_POINTS}")));
    }
    Ok(Json(query::slice_series(s, stream, &channel, t0, t1, max_points)?))
}

async fn video(State(state): State<Arc<AppState>>, Path(id): Path<String>, request: Request) -> ApiResult<Response> {
    let snapshot = state.snapshot();
    let s = session(&snapshot, &id)?;
    let video = s.video().ok_or_else(|| sessionlens_core::Error::StreamAbsent("video".into()))?;
    let path = std::path::PathBuf::from(&video.file_path);
    if !path.is_file() {
        return Err(ApiError::new(StatusCode::NOT_FOUND, "stream_absent", "video file not found")
            .with_detail(json!({ "stream": "video" })));
    }
    let response = ServeFile::new(&path)
        .try_call(request)
        .await
        .map_err(|e| ApiError::internal(format!("video: {e}")))?;
    Ok(response.map(Body::new))
}
