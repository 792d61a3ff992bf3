//! Request and response bodies. Field names are camelCase like `geno.json`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Machine-readable error codes. This list is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorCode {
    MalformedRequest,
    MalformedContext,
    InsufficientData,
    SchemaViolation,
    ModelStale,
    UnknownSession,
    WrongState,
    NotFound,
    IoFailure,
    Internal,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 10] = [
        ErrorCode::MalformedRequest,
        ErrorCode::MalformedContext,
        ErrorCode::InsufficientData,
        ErrorCode::SchemaViolation,
        ErrorCode::ModelStale,
        ErrorCode::UnknownSession,
        ErrorCode::WrongState,
        ErrorCode::NotFound,
        ErrorCode::IoFailure,
        ErrorCode::Internal,
    ];

    pub fn status(self) -> u16 {
        match self {
            ErrorCode::MalformedRequest | ErrorCode::MalformedContext => 400,
            ErrorCode::UnknownSession | ErrorCode::NotFound => 404,
            ErrorCode::ModelStale | ErrorCode::WrongState => 409,
            ErrorCode::InsufficientData | ErrorCode::SchemaViolation => 422,
            ErrorCode::IoFailure | ErrorCode::Internal => 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{code:?}: {message}")]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
        }
    }
}

/// Every JSON response: exactly one of `payload` and `error` is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Envelope<T> {
    pub request_id: String,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    pub payload: Option<T>,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    pub error: Option<ApiError>,
}

impl<T> Envelope<T> {
    pub fn into_result(self) -> Result<T, ApiError> {
        match (self.payload, self.error) {
            (_, Some(e)) => Err(e),
            (Some(p), None) => Ok(p),
            (None, None) => Err(ApiError::new(
                ErrorCode::Internal,
                "envelope has neither payload nor error",
            )),
        }
    }
}

/// `context` and `trace` stay raw here so that a bad value maps to
/// `MalformedContext` rather than `MalformedRequest`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ParseRequest {
    pub utterance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AnswerRequest {
    pub utterance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrainResponse {
    pub model_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MutationResponse {
    pub project_version: String,
    pub stale: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Health {
    pub status: String,
    pub project_name: String,
    pub project_version: String,
    pub model_version: Option<String>,
    pub stale: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RecordingStarted {
    pub recording_id: String,
}
