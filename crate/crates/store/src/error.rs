use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    /// Unknown user and wrong password are deliberately indistinguishable.
    #[error("invalid credentials")]
    InvalidCredentials,
    #[error("session missing or expired")]
    Unauthorized,
    #[error("username {0:?} is already taken")]
    UsernameTaken(String),
    #[error("{field}: {reason}")]
    ValidationFailed { field: &'static str, reason: String },
    #[error("patient is {age_months:.1} months old; only 0-216 months are accepted")]
    NotPediatric { age_months: f64 },
    #[error("unknown patient {0}")]
    UnknownPatient(String),
    #[error("unknown user {0}")]
    UnknownUser(String),
    #[error("unknown prescription")]
    UnknownPrescription,
    #[error("malformed prescription code")]
    MalformedCode,
    #[error("a prescription with this code already exists")]
    DuplicateCode,
    #[error("database error: {0}")]
    Database(#[from] rusqlite::Error),
    #[error("corrupt stored record: {0}")]
    Corrupt(#[from] serde_json::Error),
    #[error("password hashing failed: {0}")]
    Hashing(String),
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;
