//! Seed data: a JSON document with users and patients.
//!
//! ```json
//! {
//!   "users": [{"username": "dr.bello", "password": "...", "role": "pediatrician"}],
//!   "patients": [{"full_name": "...", "date_of_birth": "2021-04-02", "weight_kg": 14.5}]
//! }
//! ```

use std::io::Read;

use chrono::{DateTime, Utc};
use serde::Deserialize;

use crate::auth::Role;
use crate::error::{Result, StoreError};
use crate::patient::NewPatient;
use crate::records::Store;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureUser {
    pub username: String,
    pub password: String,
    pub role: Role,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixtures {
    #[serde(default)]
    pub users: Vec<FixtureUser>,
    #[serde(default)]
    pub patients: Vec<NewPatient>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SeedSummary {
    pub users_created: usize,
    pub users_skipped: usize,
    pub patients_created: usize,
}

impl Fixtures {
    pub fn from_reader<R: Read>(source: R) -> serde_json::Result<Self> {
        serde_json::from_reader(source)
    }
}

impl Store {
    /// Loads fixtures. Existing usernames are skipped so re-seeding users is
    /// harmless; patients are always appended.
    pub fn seed(&self, fixtures: &Fixtures, now: DateTime<Utc>) -> Result<SeedSummary> {
        let mut summary = SeedSummary::default();
        for u in &fixtures.users {
            match self.create_user(&u.username, &u.password, u.role) {
                Ok(_) => summary.users_created += 1,
                Err(StoreError::UsernameTaken(_)) => summary.users_skipped += 1,
                Err(e) => return Err(e),
            }
        }
        for p in &fixtures.patients {
            self.register_patient(p.clone(), now)?;
            summary.patients_created += 1;
        }
        Ok(summary)
    }
}
