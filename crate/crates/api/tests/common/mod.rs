#![allow(dead_code)]

use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use chrono::{DateTime, TimeZone, Utc};
use pedscript_api::{router, AppState, ManualClock};
use pedscript_core::Formulary;
use pedscript_store::{Role, Store};
use serde_json::{json, Value};
use tower::ServiceExt;

pub const FORMULARY: &str = include_str!("../../../../data/formulary.json");

pub fn start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 6, 1, 9, 0, 0).unwrap()
}

pub struct Harness {
    pub state: AppState,
    pub app: Router,
    pub clock: Arc<ManualClock>,
}

pub struct Reply {
    pub status: StatusCode,
    pub text: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("non-JSON body {:?}: {e}", self.text))
    }

    pub fn error_code(&self) -> String {
        self.json()["error_code"].as_str().unwrap_or_default().to_owned()
    }
}

/// Users created for every role; password is `pw-<username>`.
pub const USERS: [(&str, Role); 4] = [
    ("admin", Role::Admin),
    ("dr.bello", Role::Pediatrician),
    ("ph.ade", Role::Pharmacist),
    ("moh", Role::Ministry),
];

impl Harness {
    pub fn new() -> Self {
        let store = Store::open_in_memory().unwrap();
        for (name, role) in USERS {
            store.create_user(name, &format!("pw-{name}"), role).unwrap();
        }
        let formulary = Formulary::load(FORMULARY.as_bytes()).unwrap();
        let clock = Arc::new(ManualClock::new(start()));
        let state = AppState::with_clock(store, formulary, clock.clone());
        Self {
            app: router(state.clone()),
            state,
            clock,
        }
    }

    pub async fn call(&self, method: Method, path: &str, token: Option<&str>, body: Option<Value>) -> Reply {
        let mut req = Request::builder().method(method).uri(path);
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let body = match body {
            Some(v) => {
                req = req.header("content-type", "application/json");
                Body::from(v.to_string())
            }
            None => Body::empty(),
        };
        let resp = self.app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
        let status = resp.status();
        let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
        Reply {
            status,
            text: String::from_utf8(bytes.to_vec()).unwrap(),
        }
    }

    pub async fn get(&self, path: &str, token: &str) -> Reply {
        self.call(Method::GET, path, Some(token), None).await
    }

    pub async fn post(&self, path: &str, token: &str, body: Value) -> Reply {
        self.call(Method::POST, path, Some(token), Some(body)).await
    }

    pub async fn login(&self, username: &str) -> String {
        let r = self
            .call(
                Method::POST,
                "/login",
                None,
                Some(json!({"username": username, "password": format!("pw-{username}")})),
            )
            .await;
        assert_eq!(r.status, StatusCode::OK, "{}", r.text);
        r.json()["token"].as_str().unwrap().to_owned()
    }

    pub async fn register(&self, token: &str, name: &str, weight_kg: f64, allergens: &[&str]) -> Value {
        let r = self
            .post(
                "/patients",
                token,
                json!({
                    "full_name": name,
                    "date_of_birth": "2022-03-14",
                    "weight_kg": weight_kg,
                    "sex": "F",
                    "allergens": allergens,
                }),
            )
            .await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text);
        r.json()
    }
}
