//! Persistence and identity for the e-prescribing service: patient records,
//! users with roles, login sessions and issued prescriptions.

pub mod auth;
mod error;
pub mod fixtures;
pub mod patient;
mod records;

pub use auth::{Role, Session, User, SESSION_HOURS};
pub use error::{Result, StoreError};
pub use fixtures::{Fixtures, SeedSummary};
pub use patient::{age_in_months, AdrEntry, NewPatient, Patient};
pub use records::Store;
