use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::{json, Value};
use sessionlens_core::Error;

/// JSON error body: `{code, message, detail}`.
#[derive(Clone, Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_argument", message)
    }

    pub fn unknown_sessions(ids: Vec<String>) -> Self {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "unknown_session",
            format!("unknown session id(s): {}", ids.join(", ")),
        )
        .with_detail(json!({ "session_ids": ids }))
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let message = err.to_string();
        match err {
            Error::InvalidWindow { t0, t1, duration_s } => ApiError::new(StatusCode::BAD_REQUEST, "invalid_window", message)
                .with_detail(json!({ "t0": t0, "t1": t1, "duration_s": duration_s })),
            Error::UnknownChannel { channel, valid } => ApiError::new(StatusCode::BAD_REQUEST, "unknown_channel", message)
                .with_detail(json!({ "channel": channel, "valid_channels": valid })),
            Error::StreamAbsent(stream) => ApiError::new(StatusCode::NOT_FOUND, "stream_absent", message)
                .with_detail(json!({ "stream": stream })),
            Error::NoEmbeddableSessions(stream) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "no_embeddable_sessions", message)
                    .with_detail(json!({ "stream": stream }))
            }
            Error::InvalidArgument(_) | Error::Spec(_) => ApiError::bad_request(message),
            Error::Validation(v) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "validation", message)
                .with_detail(json!({ "reason": v.code() })),
            Error::Io { .. } | Error::Manifest { .. } => ApiError::internal(message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
