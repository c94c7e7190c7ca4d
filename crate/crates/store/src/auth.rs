//! Users, roles, password digests and sessions.

use std::sync::OnceLock;

use argon2::password_hash::{PasswordHash, PasswordHasher, PasswordVerifier, SaltString};
use argon2::Argon2;
use chrono::{DateTime, Duration, Utc};
use pedscript_core::UserId;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StoreError};

pub const SESSION_HOURS: i64 = 8;
const TOKEN_BYTES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Admin,
    Pediatrician,
    Pharmacist,
    Ministry,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::Admin, Role::Pediatrician, Role::Pharmacist, Role::Ministry];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Admin => "admin",
            Role::Pediatrician => "pediatrician",
            Role::Pharmacist => "pharmacist",
            Role::Ministry => "ministry",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct User {
    pub user_id: UserId,
    pub username: String,
    #[serde(skip)]
    pub password_digest: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub token: String,
    pub user_id: UserId,
    pub role: Role,
    pub expires_at: DateTime<Utc>,
}

impl Session {
    pub fn is_live_at(&self, now: DateTime<Utc>) -> bool {
        now < self.expires_at
    }
}

pub(crate) fn new_session(user: &User, now: DateTime<Utc>) -> Session {
    let mut bytes = [0u8; TOKEN_BYTES];
    rand::rng().fill_bytes(&mut bytes);
    Session {
        token: hex::encode(bytes),
        user_id: user.user_id.clone(),
        role: user.role,
        expires_at: now + Duration::hours(SESSION_HOURS),
    }
}

/// Argon2id digest in PHC string format with a fresh 16-byte salt.
pub fn hash_password(password: &str) -> Result<String> {
    let mut salt = [0u8; 16];
    rand::rng().fill_bytes(&mut salt);
    let salt = SaltString::encode_b64(&salt).map_err(|e| StoreError::Hashing(e.to_string()))?;
    Argon2::default()
        .hash_password(password.as_bytes(), &salt)
        .map(|h| h.to_string())
        .map_err(|e| StoreError::Hashing(e.to_string()))
}

pub fn verify_password(password: &str, digest: &str) -> bool {
    match PasswordHash::new(digest) {
        Ok(parsed) => Argon2::default().verify_password(password.as_bytes(), &parsed).is_ok(),
        Err(_) => false,
    }
}

/// Digest checked against when the username does not exist, so both
/// failure paths cost one hash verification.
pub(crate) fn decoy_digest() -> &'static str {
    static DECOY: OnceLock<String> = OnceLock::new();
    DECOY.get_or_init(|| hash_password("decoy-password-never-matches").expect("argon2 with default params"))
}
