//! Request extractors: bearer sessions and JSON bodies with field-named errors.

use axum::body::Bytes;
use axum::extract::{FromRequest, FromRequestParts, Request};
use axum::http::header::AUTHORIZATION;
use axum::http::request::Parts;
use pedscript_store::{Role, Session};
use serde::de::DeserializeOwned;

use crate::error::ApiError;
use crate::state::AppState;

/// A live session resolved from `Authorization: Bearer <token>`.
pub struct Authed(pub Session);

impl Authed {
    pub fn require(&self, allowed: &[Role]) -> Result<&Session, ApiError> {
        if allowed.contains(&self.0.role) {
            Ok(&self.0)
        } else {
            Err(ApiError::forbidden())
        }
    }
}

impl FromRequestParts<AppState> for Authed {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let header = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .ok_or_else(ApiError::unauthorized)?;
        let token = header.strip_prefix("Bearer ").unwrap_or(header).trim().to_owned();
        if token.is_empty() {
            return Err(ApiError::unauthorized());
        }
        let now = state.clock.now();
        let session = state.blocking(move |s| Ok(s.store.authorize(&token, now)?)).await?;
        Ok(Authed(session))
    }
}

/// JSON body whose decode errors name the offending field.
pub struct JsonBody<T>(pub T);

impl<T, S> FromRequest<S> for JsonBody<T>
where
    T: DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let bytes = Bytes::from_request(req, state)
            .await
            .map_err(|e| ApiError::validation("body", e.to_string()))?;
        serde_json::from_slice(&bytes).map(JsonBody).map_err(|e| {
            let message = e.to_string();
            let field = backticked(&message).unwrap_or("body").to_owned();
            ApiError::validation(field, message)
        })
    }
}

fn backticked(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}
