//! HTTP surface.
//!
//! | endpoint                              | roles                     |
//! |---------------------------------------|---------------------------|
//! | `POST /login`                         | public                    |
//! | `POST /users`                         | admin                     |
//! | `GET/POST /patients`                  | pediatrician, admin       |
//! | `GET /patients/{id}`                  | pediatrician, admin       |
//! | `POST /patients/{id}/adr`             | pediatrician              |
//! | `GET /drugs`, `GET /drugs/{id}`       | pediatrician, pharmacist  |
//! | `POST /suggestions`                   | pediatrician              |
//! | `POST /prescriptions`                 | pediatrician              |
//! | `GET /prescriptions/{code}`           | pharmacist                |
//! | `POST /prescriptions/{code}/dispense` | pharmacist                |
//! | `GET /prescriptions/{id}/print`       | pediatrician              |
//! | `GET /reports/ministry`               | ministry                  |

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use pedscript_core::{DrugId, DrugMonograph, PatientId, Prescription, PrescriptionId};
use pedscript_store::{NewPatient, Patient, Role, User};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::extract::{Authed, JsonBody};
use crate::printable;
use crate::service::{self, MinistryReport, PrescribeRequest, PrescriptionView, SuggestionEntry};
use crate::state::AppState;

const PRESCRIBERS: &[Role] = &[Role::Pediatrician];
const PATIENT_DESK: &[Role] = &[Role::Pediatrician, Role::Admin];
const PHARMACY: &[Role] = &[Role::Pharmacist];
const DRUG_READERS: &[Role] = &[Role::Pediatrician, Role::Pharmacist];

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/login", post(login))
        .route("/users", post(create_user))
        .route("/patients", get(list_patients).post(create_patient))
        .route("/patients/{id}", get(get_patient))
        .route("/patients/{id}/adr", post(record_adr))
        .route("/drugs", get(list_drugs))
        .route("/drugs/{id}", get(get_drug))
        .route("/suggestions", post(suggest))
        .route("/prescriptions", post(prescribe))
        .route("/prescriptions/{key}", get(view_prescription))
        .route("/prescriptions/{key}/dispense", post(dispense))
        .route("/prescriptions/{key}/print", get(print))
        .route("/reports/ministry", get(ministry_report))
        .with_state(state)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoginRequest {
    pub username: String,
    pub password: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LoginResponse {
    pub token: String,
    pub role: Role,
    pub user_id: String,
    pub expires_at: DateTime<Utc>,
}

async fn login(State(state): State<AppState>, JsonBody(req): JsonBody<LoginRequest>) -> Result<Json<LoginResponse>, ApiError> {
    let now = state.clock.now();
    let session = state
        .blocking(move |s| Ok(s.store.authenticate(&req.username, &req.password, now)?))
        .await?;
    Ok(Json(LoginResponse {
        token: session.token,
        role: session.role,
        user_id: session.user_id.0,
        expires_at: session.expires_at,
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateUserRequest {
    pub username: String,
    pub password: String,
    pub role: Role,
}

async fn create_user(
    State(state): State<AppState>,
    auth: Authed,
    JsonBody(req): JsonBody<CreateUserRequest>,
) -> Result<(StatusCode, Json<User>), ApiError> {
    auth.require(&[Role::Admin])?;
    let user = state
        .blocking(move |s| Ok(s.store.create_user(&req.username, &req.password, req.role)?))
        .await?;
    Ok((StatusCode::CREATED, Json(user)))
}

#[derive(Debug, Deserialize)]
pub struct PatientQuery {
    #[serde(default)]
    pub query: Option<String>,
}

async fn list_patients(
    State(state): State<AppState>,
    auth: Authed,
    Query(q): Query<PatientQuery>,
) -> Result<Json<Vec<Patient>>, ApiError> {
    auth.require(PATIENT_DESK)?;
    let list = state
        .blocking(move |s| Ok(s.store.list_patients(q.query.as_deref())?))
        .await?;
    Ok(Json(list))
}

async fn create_patient(
    State(state): State<AppState>,
    auth: Authed,
    JsonBody(record): JsonBody<NewPatient>,
) -> Result<(StatusCode, Json<Patient>), ApiError> {
    auth.require(PATIENT_DESK)?;
    let now = state.clock.now();
    let patient = state.blocking(move |s| Ok(s.store.register_patient(record, now)?)).await?;
    Ok((StatusCode::CREATED, Json(patient)))
}

async fn get_patient(State(state): State<AppState>, auth: Authed, Path(id): Path<String>) -> Result<Json<Patient>, ApiError> {
    auth.require(PATIENT_DESK)?;
    let patient = state.blocking(move |s| Ok(s.store.get_patient(&PatientId(id))?)).await?;
    Ok(Json(patient))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdrRequest {
    pub drug_id: DrugId,
    pub note: String,
}

async fn record_adr(
    State(state): State<AppState>,
    auth: Authed,
    Path(id): Path<String>,
    JsonBody(req): JsonBody<AdrRequest>,
) -> Result<Json<Patient>, ApiError> {
    auth.require(PRESCRIBERS)?;
    let now = state.clock.now();
    let patient = state
        .blocking(move |s| Ok(s.store.record_adr(&PatientId(id), req.drug_id, &req.note, now)?))
        .await?;
    Ok(Json(patient))
}

#[derive(Debug, Deserialize)]
pub struct DrugQuery {
    #[serde(default)]
    pub indication: Option<String>,
}

async fn list_drugs(State(state): State<AppState>, auth: Authed, Query(q): Query<DrugQuery>) -> Result<Json<Vec<DrugMonograph>>, ApiError> {
    auth.require(DRUG_READERS)?;
    let formulary = state.formulary();
    let list = match q.indication {
        Some(ind) => formulary.find_by_indication(&ind).into_iter().cloned().collect(),
        None => formulary.monographs().cloned().collect(),
    };
    Ok(Json(list))
}

async fn get_drug(State(state): State<AppState>, auth: Authed, Path(id): Path<String>) -> Result<Json<DrugMonograph>, ApiError> {
    auth.require(DRUG_READERS)?;
    let formulary = state.formulary();
    Ok(Json(formulary.get_monograph(&DrugId(id))?.clone()))
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SuggestionRequest {
    pub patient_id: PatientId,
    pub diagnosis: String,
}

async fn suggest(
    State(state): State<AppState>,
    auth: Authed,
    JsonBody(req): JsonBody<SuggestionRequest>,
) -> Result<Json<Vec<SuggestionEntry>>, ApiError> {
    auth.require(PRESCRIBERS)?;
    let entries = state
        .blocking(move |s| {
            let patient = s.store.get_patient(&req.patient_id)?;
            service::suggestions(&s.formulary(), &patient, &req.diagnosis)
        })
        .await?;
    Ok(Json(entries))
}

async fn prescribe(
    State(state): State<AppState>,
    auth: Authed,
    JsonBody(req): JsonBody<PrescribeRequest>,
) -> Result<(StatusCode, Json<Prescription>), ApiError> {
    let prescriber = auth.require(PRESCRIBERS)?.user_id.clone();
    let now = state.clock.now();
    let issued = state.blocking(move |s| service::prescribe(s, &prescriber, req, now)).await?;
    Ok((StatusCode::CREATED, Json(issued)))
}

async fn view_prescription(
    State(state): State<AppState>,
    auth: Authed,
    Path(code): Path<String>,
) -> Result<Json<PrescriptionView>, ApiError> {
    auth.require(PHARMACY)?;
    let now = state.clock.now();
    let view = state.blocking(move |s| service::lookup(s, &code, now)).await?;
    Ok(Json(view))
}

async fn dispense(State(state): State<AppState>, auth: Authed, Path(code): Path<String>) -> Result<Json<Prescription>, ApiError> {
    let pharmacist = auth.require(PHARMACY)?.user_id.clone();
    let now = state.clock.now();
    let done = state.blocking(move |s| service::dispense(s, &code, &pharmacist, now)).await?;
    Ok(Json(done))
}

async fn print(State(state): State<AppState>, auth: Authed, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    auth.require(PRESCRIBERS)?;
    let text = state
        .blocking(move |s| {
            let p = s.store.fetch_prescription(&PrescriptionId(id))?;
            let patient = s.store.get_patient(&p.patient_id)?;
            let prescriber = s.store.get_user(&p.prescriber_id)?;
            Ok(printable::render(&p, &patient, &prescriber.username)?.to_text())
        })
        .await?;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text))
}

#[derive(Debug, Deserialize)]
pub struct PeriodQuery {
    pub from: Option<String>,
    pub to: Option<String>,
}

fn parse_instant(field: &'static str, value: Option<String>) -> Result<DateTime<Utc>, ApiError> {
    let value = value.ok_or_else(|| ApiError::validation(field, format!("missing `{field}`")))?;
    DateTime::parse_from_rfc3339(&value)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| ApiError::validation(field, format!("expected an RFC 3339 timestamp: {e}")))
}

async fn ministry_report(
    State(state): State<AppState>,
    auth: Authed,
    Query(q): Query<PeriodQuery>,
) -> Result<Json<MinistryReport>, ApiError> {
    auth.require(&[Role::Ministry])?;
    let from = parse_instant("from", q.from)?;
    let to = parse_instant("to", q.to)?;
    let report = state.blocking(move |s| service::ministry_report(s, from, to)).await?;
    Ok(Json(report))
}
