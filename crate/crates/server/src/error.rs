use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use waypoint_core::engine::{PlanningError, RevisionError};
use waypoint_core::llm::GatewayError;
use waypoint_core::session::SessionError;

use crate::store::StoreError;

/// Every code the API can return, with its status.
pub const ERROR_CODES: &[(&str, u16)] = &[
    ("invalid_request", 400),
    ("invalid_preferences", 400),
    ("invalid_position", 400),
    ("empty_message", 400),
    ("invalid_note", 400),
    ("invalid_timestamp", 400),
    ("not_found", 404),
    ("no_replacement", 409),
    ("invalid_revision", 409),
    ("revision_conflict", 409),
    ("note_redundant", 409),
    ("note_too_thin", 409),
    ("invalid_concept_map", 422),
    ("insufficient_candidates", 422),
    ("bad_index", 422),
    ("invalid_plan", 422),
    ("internal", 500),
    ("storage_error", 500),
    ("provider_error", 502),
    ("llm_exhausted", 502),
    ("ingest_failed", 502),
];

/// The JSON body of every error response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        debug_assert!(ERROR_CODES.iter().any(|(c, _)| *c == code), "unlisted code {code}");
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn status(&self) -> StatusCode {
        let n = ERROR_CODES
            .iter()
            .find(|(c, _)| *c == self.code)
            .map_or(500, |(_, s)| *s);
        StatusCode::from_u16(n).expect("listed statuses are valid")
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        Self::new("not_found", what)
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new("invalid_request", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new("internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            tracing::error!(code = self.code, "{}", self.message);
        }
        let body = ErrorBody {
            code: self.code.to_string(),
            message: self.message,
        };
        (status, Json(body)).into_response()
    }
}

fn gateway(e: GatewayError) -> ApiError {
    match &e {
        GatewayError::Provider(_) => ApiError::new("provider_error", e.to_string()),
        GatewayError::Exhausted { .. } => ApiError::new("llm_exhausted", e.to_string()),
        GatewayError::Template(_) => ApiError::internal(e.to_string()),
    }
}

impl From<GatewayError> for ApiError {
    fn from(e: GatewayError) -> Self {
        gateway(e)
    }
}

impl From<PlanningError> for ApiError {
    fn from(e: PlanningError) -> Self {
        let message = e.to_string();
        match e {
            PlanningError::Preferences(_) => ApiError::new("invalid_preferences", message),
            PlanningError::Llm(g) => gateway(g),
            PlanningError::Ingest(_) => ApiError::new("ingest_failed", message),
            PlanningError::InvalidConceptMap(_) => ApiError::new("invalid_concept_map", message),
            PlanningError::InsufficientCandidates { .. } => ApiError::new("insufficient_candidates", message),
            PlanningError::BadIndex { .. } => ApiError::new("bad_index", message),
            PlanningError::InvalidPlan(_) => ApiError::new("invalid_plan", message),
            PlanningError::PoolMismatch(_) => ApiError::internal(message),
        }
    }
}

impl From<RevisionError> for ApiError {
    fn from(e: RevisionError) -> Self {
        let message = e.to_string();
        match e {
            // the position is part of the resource path
            RevisionError::InvalidPosition(_) => ApiError::not_found(message),
            RevisionError::NoReplacement(_) => ApiError::new("no_replacement", message),
            RevisionError::Llm(g) => gateway(g),
            RevisionError::Invalid(_) => ApiError::new("invalid_revision", message),
            RevisionError::PoolMismatch(_) => ApiError::internal(message),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        match e {
            SessionError::InvalidPosition(_) => ApiError::new("invalid_position", message),
            SessionError::EmptyMessage => ApiError::new("empty_message", message),
            SessionError::InvalidNote(_) => ApiError::new("invalid_note", message),
            SessionError::InvalidTimestamp { .. } => ApiError::new("invalid_timestamp", message),
            SessionError::PathwayMismatch { .. } => ApiError::internal(message),
            SessionError::Llm(g) => gateway(g),
            SessionError::NoteRedundant => ApiError::new("note_redundant", message),
            SessionError::NoteTooThin(_) => ApiError::new("note_too_thin", message),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::NotFound { .. } => ApiError::not_found(message),
            StoreError::Conflict(_) => ApiError::new("revision_conflict", message),
            StoreError::Integrity(_) | StoreError::Io { .. } | StoreError::Corrupt { .. } => {
                ApiError::new("storage_error", message)
            }
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl From<PathRejection> for ApiError {
    fn from(e: PathRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}
