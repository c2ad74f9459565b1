use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use ecomate_core::ValidationOutcome;
use serde_json::json;
use thiserror::Error;

use crate::routine::InvalidTransition;

/// Every failure an endpoint can report. The JSON body always carries an
/// `error` kind and a human-readable `message`.
#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{0}")]
    Schema(String),
    #[error("{0} not found")]
    NotFound(String),
    #[error(transparent)]
    InvalidTransition(#[from] InvalidTransition),
    #[error("settings incomplete: {0}")]
    SettingsMissing(String),
    #[error("{0}")]
    Provider(String),
    #[error("{0}")]
    Ha(String),
    #[error("{}", .0.message)]
    HaRejected(ValidationOutcome),
    #[error("missing or invalid bearer token")]
    Unauthorized,
    #[error("store: {0}")]
    Store(String),
}

impl ApiError {
    pub fn kind(&self) -> &'static str {
        match self {
            ApiError::Schema(_) => "SchemaError",
            ApiError::NotFound(_) => "NotFound",
            ApiError::InvalidTransition(_) => "InvalidTransition",
            ApiError::SettingsMissing(_) => "SettingsMissing",
            ApiError::Provider(_) => "ProviderError",
            ApiError::Ha(_) | ApiError::HaRejected(_) => "HaError",
            ApiError::Unauthorized => "Unauthorized",
            ApiError::Store(_) => "StoreError",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::Schema(_) | ApiError::HaRejected(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::InvalidTransition(_) => StatusCode::CONFLICT,
            ApiError::SettingsMissing(_) => StatusCode::PRECONDITION_FAILED,
            ApiError::Provider(_) | ApiError::Ha(_) => StatusCode::BAD_GATEWAY,
            ApiError::Unauthorized => StatusCode::UNAUTHORIZED,
            ApiError::Store(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.kind(), "message": self.to_string() });
        if let ApiError::HaRejected(outcome) = &self {
            body["status"] = json!(outcome.status);
            body["offending_path"] = json!(outcome.offending_path);
        }
        (self.status(), Json(body)).into_response()
    }
}
