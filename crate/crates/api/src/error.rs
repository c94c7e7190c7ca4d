use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use pedscript_core::{DoseError, FormularyError, LifecycleError};
use pedscript_store::StoreError;
use serde::{Deserialize, Serialize};

/// Wire form of every error: `{error_code, message, field?, details?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error_code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                error_code: code.to_owned(),
                message: message.into(),
                field: None,
                details: None,
            },
        }
    }

    pub fn with_field(mut self, field: impl Into<String>) -> Self {
        self.body.field = Some(field.into());
        self
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.body.details = Some(details);
        self
    }

    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "validation_failed", message).with_field(field)
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", "session missing or expired")
    }

    pub fn forbidden() -> Self {
        Self::new(StatusCode::FORBIDDEN, "forbidden", "role not permitted for this endpoint")
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn code(&self) -> &str {
        &self.body.error_code
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        use StatusCode as S;
        let msg = e.to_string();
        match e {
            StoreError::InvalidCredentials => Self::new(S::UNAUTHORIZED, "invalid_credentials", msg),
            StoreError::Unauthorized => Self::unauthorized(),
            StoreError::UsernameTaken(_) => Self::new(S::CONFLICT, "username_taken", msg).with_field("username"),
            StoreError::ValidationFailed { field, reason } => Self::validation(field, reason),
            StoreError::NotPediatric { .. } => {
                Self::new(S::BAD_REQUEST, "not_pediatric", msg).with_field("date_of_birth")
            }
            StoreError::UnknownPatient(_) => Self::new(S::NOT_FOUND, "unknown_patient", msg),
            StoreError::UnknownUser(_) => Self::new(S::NOT_FOUND, "unknown_user", msg),
            StoreError::UnknownPrescription => Self::new(S::NOT_FOUND, "unknown_prescription", msg),
            StoreError::MalformedCode => Self::new(S::BAD_REQUEST, "malformed_code", "possible typo: code checksum failed"),
            StoreError::DuplicateCode => Self::new(S::CONFLICT, "duplicate_code", msg),
            StoreError::Database(_) | StoreError::Corrupt(_) | StoreError::Hashing(_) => {
                tracing::error!(error = %msg, "store failure");
                Self::internal("storage failure")
            }
        }
    }
}

impl From<LifecycleError> for ApiError {
    fn from(e: LifecycleError) -> Self {
        use StatusCode as S;
        let msg = e.to_string();
        match e {
            LifecycleError::EmptyPrescription => Self::new(S::BAD_REQUEST, "empty_prescription", msg).with_field("items"),
            LifecycleError::IllegalTransition { .. } => Self::new(S::CONFLICT, "illegal_transition", msg),
            LifecycleError::NotIssued => Self::new(S::CONFLICT, "not_issued", msg),
            LifecycleError::AlreadyDispensed => Self::new(S::CONFLICT, "already_dispensed", msg),
            LifecycleError::ExpiredPrescription => Self::new(S::GONE, "expired_prescription", msg),
            LifecycleError::StillValid => Self::new(S::CONFLICT, "still_valid", msg),
        }
    }
}

impl From<FormularyError> for ApiError {
    fn from(e: FormularyError) -> Self {
        match e {
            FormularyError::UnknownDrug(_) => Self::new(StatusCode::NOT_FOUND, "unknown_drug", e.to_string()),
            other => Self::internal(other.to_string()),
        }
    }
}

impl From<DoseError> for ApiError {
    fn from(e: DoseError) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "dose_error", e.to_string())
    }
}
