use std::path::Path;

use chrono::{DateTime, Utc};
use parking_lot::Mutex;
use pedscript_core::{
    code_checksum_valid, DrugId, PatientId, Prescription, PrescriptionCode, PrescriptionId, PrescriptionStatus, UserId,
};
use rusqlite::{params, Connection, ErrorCode, OptionalExtension, TransactionBehavior};
use uuid::Uuid;

use crate::auth::{decoy_digest, hash_password, new_session, verify_password, Role, Session, User};
use crate::error::{Result, StoreError};
use crate::patient::{AdrEntry, NewPatient, Patient};

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS users (
    user_id TEXT PRIMARY KEY,
    username TEXT NOT NULL UNIQUE,
    password_digest TEXT NOT NULL,
    role TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (
    token TEXT PRIMARY KEY,
    user_id TEXT NOT NULL REFERENCES users(user_id),
    role TEXT NOT NULL,
    expires_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS patients (
    patient_id TEXT PRIMARY KEY,
    full_name TEXT NOT NULL,
    active INTEGER NOT NULL,
    body TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS prescriptions (
    internal_id TEXT PRIMARY KEY,
    code TEXT UNIQUE,
    patient_id TEXT NOT NULL REFERENCES patients(patient_id),
    prescriber_id TEXT NOT NULL REFERENCES users(user_id),
    status TEXT NOT NULL,
    issued_at INTEGER,
    body TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS prescriptions_status ON prescriptions(status);
CREATE INDEX IF NOT EXISTS prescriptions_issued_at ON prescriptions(issued_at);
";

fn micros(t: DateTime<Utc>) -> i64 {
    t.timestamp_micros()
}

fn from_micros(us: i64) -> DateTime<Utc> {
    DateTime::from_timestamp_micros(us).expect("stored timestamp in range")
}

/// Transactional record store over an embedded SQLite database.
///
/// All methods take `&self`; the connection is serialized behind a mutex.
/// Password hashing runs outside the lock.
pub struct Store {
    conn: Mutex<Connection>,
}

impl Store {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Self::init(Connection::open(path)?)
    }

    pub fn open_in_memory() -> Result<Self> {
        Self::init(Connection::open_in_memory()?)
    }

    fn init(conn: Connection) -> Result<Self> {
        conn.pragma_update(None, "foreign_keys", "ON")?;
        conn.pragma_update(None, "journal_mode", "WAL")?;
        conn.execute_batch(SCHEMA)?;
        Ok(Self { conn: Mutex::new(conn) })
    }

    // ---- users and sessions ----

    pub fn create_user(&self, username: &str, password: &str, role: Role) -> Result<User> {
        let username = username.trim();
        if username.is_empty() {
            return Err(StoreError::ValidationFailed {
                field: "username",
                reason: "must not be empty".into(),
            });
        }
        if password.is_empty() {
            return Err(StoreError::ValidationFailed {
                field: "password",
                reason: "must not be empty".into(),
            });
        }
        let user = User {
            user_id: UserId(Uuid::new_v4().to_string()),
            username: username.to_owned(),
            password_digest: hash_password(password)?,
            role,
        };
        let conn = self.conn.lock();
        match conn.execute(
            "INSERT INTO users (user_id, username, password_digest, role) VALUES (?1, ?2, ?3, ?4)",
            params![user.user_id.0, user.username, user.password_digest, role.as_str()],
        ) {
            Ok(_) => Ok(user),
            Err(rusqlite::Error::SqliteFailure(e, _)) if e.code == ErrorCode::ConstraintViolation => {
                Err(StoreError::UsernameTaken(user.username))
            }
            Err(e) => Err(e.into()),
        }
    }

    fn user_by(&self, column: &str, value: &str) -> Result<Option<User>> {
        let conn = self.conn.lock();
        let sql = format!("SELECT user_id, username, password_digest, role FROM users WHERE {column} = ?1");
        let row = conn
            .query_row(&sql, [value], |r| {
                Ok((
                    r.get::<_, String>(0)?,
                    r.get::<_, String>(1)?,
                    r.get::<_, String>(2)?,
                    r.get::<_, String>(3)?,
                ))
            })
            .optional()?;
        Ok(row.map(|(id, username, password_digest, role)| User {
            user_id: UserId(id),
            username,
            password_digest,
            role: Role::parse(&role).unwrap_or(Role::Ministry),
        }))
    }

    pub fn get_user(&self, user_id: &UserId) -> Result<User> {
        self.user_by("user_id", user_id.as_str())?
            .ok_or_else(|| StoreError::UnknownUser(user_id.0.clone()))
    }

    pub fn find_user(&self, username: &str) -> Result<Option<User>> {
        self.user_by("username", username.trim())
    }

    /// Verifies credentials and opens an 8-hour session.
    pub fn authenticate(&self, username: &str, password: &str, now: DateTime<Utc>) -> Result<Session> {
        let user = self.find_user(username)?;
        let digest = user.as_ref().map_or(decoy_digest(), |u| u.password_digest.as_str());
        let matched = verify_password(password, digest);
        let user = match (user, matched) {
            (Some(u), true) => u,
            _ => return Err(StoreError::InvalidCredentials),
        };
        let session = new_session(&user, now);
        self.conn.lock().execute(
            "INSERT INTO sessions (token, user_id, role, expires_at) VALUES (?1, ?2, ?3, ?4)",
            params![session.token, session.user_id.0, session.role.as_str(), micros(session.expires_at)],
        )?;
        Ok(session)
    }

    /// Resolves a bearer token to a live session.
    pub fn authorize(&self, token: &str, now: DateTime<Utc>) -> Result<Session> {
        let conn = self.conn.lock();
        let row = conn
            .query_row(
                "SELECT user_id, role, expires_at FROM sessions WHERE token = ?1",
                [token],
                |r| Ok((r.get::<_, String>(0)?, r.get::<_, String>(1)?, r.get::<_, i64>(2)?)),
            )
            .optional()?;
        let (user_id, role, expires_at) = row.ok_or(StoreError::Unauthorized)?;
        let session = Session {
            token: token.to_owned(),
            user_id: UserId(user_id),
            role: Role::parse(&role).ok_or(StoreError::Unauthorized)?,
            expires_at: from_micros(expires_at),
        };
        if !session.is_live_at(now) {
            return Err(StoreError::Unauthorized);
        }
        Ok(session)
    }

    pub fn purge_sessions(&self, now: DateTime<Utc>) -> Result<usize> {
        Ok(self
            .conn
            .lock()
            .execute("DELETE FROM sessions WHERE expires_at <= ?1", [micros(now)])?)
    }

    // ---- patients ----

    pub fn register_patient(&self, record: NewPatient, now: DateTime<Utc>) -> Result<Patient> {
        let patient = record.into_patient(PatientId(Uuid::new_v4().to_string()), now)?;
        self.conn.lock().execute(
            "INSERT INTO patients (patient_id, full_name, active, body) VALUES (?1, ?2, 1, ?3)",
            params![patient.patient_id.0, patient.full_name, serde_json::to_string(&patient)?],
        )?;
        Ok(patient)
    }

    pub fn get_patient(&self, patient_id: &PatientId) -> Result<Patient> {
        let body: Option<String> = self
            .conn
            .lock()
            .query_row("SELECT body FROM patients WHERE patient_id = ?1", [patient_id.as_str()], |r| {
                r.get(0)
            })
            .optional()?;
        let body = body.ok_or_else(|| StoreError::UnknownPatient(patient_id.0.clone()))?;
        Ok(serde_json::from_str(&body)?)
    }

    /// Active patients sorted by name; the filter is a case-insensitive substring.
    pub fn list_patients(&self, filter: Option<&str>) -> Result<Vec<Patient>> {
        let conn = self.conn.lock();
        let mut stmt = conn.prepare("SELECT body FROM patients WHERE active = 1")?;
        let bodies = stmt.query_map([], |r| r.get::<_, String>(0))?;
        let needle = filter.map(|f| f.trim().to_lowercase()).filter(|f| !f.is_empty());
        let mut out = Vec::new();
        for body in bodies {
            let p: Patient = serde_json::from_str(&body?)?;
            if needle.as_ref().is_none_or(|n| p.full_name.to_lowercase().contains(n.as_str())) {
                out.push(p);
            }
        }
        out.sort_by(|a, b| {
            a.full_name
                .to_lowercase()
                .cmp(&b.full_name.to_lowercase())
                .then_with(|| a.patient_id.cmp(&b.patient_id))
        });
        Ok(out)
    }

    fn update_patient<F>(&self, patient_id: &PatientId, f: F) -> Result<Patient>
    where
        F: FnOnce(&mut Patient),
    {
        let mut conn = self.conn.lock();
        let tx = conn.transaction_with_behavior(TransactionBehavior::Immediate)?;
        let body: Option<String> = tx
            .query_row("SELECT body FROM patients WHERE patient_id = ?1", [patient_id.as_str()], |r| {
                r.get(0)
            })
            .optional()?;
        let mut patient: Patient =
            serde_json::from_str(&body.ok_or_else(|| StoreError::UnknownPatient(patient_id.0.clone()))?)?;
        f(&mut patient);
        tx.execute(
            "UPDATE patients SET body = ?1, active = ?2 WHERE patient_id = ?3",
            params![serde_json::to_string(&patient)?, patient.active, patient_id.as_str()],
        )?;
        tx.commit()?;
        Ok(patient)
    }

    pub fn record_adr(&self, patient_id: &PatientId, drug_id: DrugId, note: &str, now: DateTime<Utc>) -> Result<Patient> {
        self.update_patient(patient_id, |p| {
            p.adr_history.push(AdrEntry {
                drug_id,
                note: note.to_owned(),
                recorded_at: now,
            })
        })
    }

    /// Hides a patient from lists. Records are never deleted.
    pub fn deactivate_patient(&self, patient_id: &PatientId) -> Result<Patient> {
        self.update_patient(patient_id, |p| p.active = false)
    }

    // ---- prescriptions ----

    /// Inserts a new prescription. Codes are unique; patient and prescriber must exist.
    pub fn store_prescription(&self, p: &Prescription) -> Result<()> {
        let mut conn = self.conn.lock();
        let tx = conn.transaction_with_behavior(TransactionBehavior::Immediate)?;
        let exists = |sql: &str, key: &str| -> Result<bool> {
            Ok(tx.query_row(sql, [key], |_| Ok(())).optional()?.is_some())
        };
        if !exists("SELECT 1 FROM patients WHERE patient_id = ?1", p.patient_id.as_str())? {
            return Err(StoreError::UnknownPatient(p.patient_id.0.clone()));
        }
        if !exists("SELECT 1 FROM users WHERE user_id = ?1", p.prescriber_id.as_str())? {
            return Err(StoreError::UnknownUser(p.prescriber_id.0.clone()));
        }
        let code = p.code.as_ref().map(PrescriptionCode::as_str);
        if let Some(code) = code {
            if exists("SELECT 1 FROM prescriptions WHERE code = ?1", code)? {
                return Err(StoreError::DuplicateCode);
            }
        }
        tx.execute(
            "INSERT INTO prescriptions (internal_id, code, patient_id, prescriber_id, status, issued_at, body)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)",
            params![
                p.internal_id.0,
                code,
                p.patient_id.0,
                p.prescriber_id.0,
                p.status.as_str(),
                p.issued_at.map(micros),
                serde_json::to_string(p)?
            ],
        )?;
        tx.commit()?;
        Ok(())
    }

    fn prescription_where(&self, column: &str, key: &str) -> Result<Prescription> {
        let sql = format!("SELECT body FROM prescriptions WHERE {column} = ?1");
        let body: Option<String> = self.conn.lock().query_row(&sql, [key], |r| r.get(0)).optional()?;
        Ok(serde_json::from_str(&body.ok_or(StoreError::UnknownPrescription)?)?)
    }

    pub fn fetch_prescription(&self, internal_id: &PrescriptionId) -> Result<Prescription> {
        self.prescription_where("internal_id", internal_id.as_str())
    }

    /// Lookup by canonical code. A checksum failure is reported as
    /// `MalformedCode`, distinct from a well-formed code that matches nothing.
    pub fn fetch_by_code(&self, code: &str) -> Result<Prescription> {
        if !code_checksum_valid(code) {
            return Err(StoreError::MalformedCode);
        }
        self.prescription_where("code", code)
    }

    /// Compare-and-set on status: writes `updated` only if the stored status
    /// is still `expected`. Returns whether this caller won.
    pub fn transition(&self, updated: &Prescription, expected: PrescriptionStatus) -> Result<bool> {
        let changed = self.conn.lock().execute(
            "UPDATE prescriptions SET status = ?1, body = ?2 WHERE internal_id = ?3 AND status = ?4",
            params![
                updated.status.as_str(),
                serde_json::to_string(updated)?,
                updated.internal_id.0,
                expected.as_str()
            ],
        )?;
        Ok(changed == 1)
    }

    fn prescriptions_query(&self, sql: &str, args: impl rusqlite::Params) -> Result<Vec<Prescription>> {
        let conn = self.conn.lock();
        let mut stmt = conn.prepare(sql)?;
        let rows = stmt.query_map(args, |r| r.get::<_, String>(0))?;
        let mut out = Vec::new();
        for body in rows {
            out.push(serde_json::from_str(&body?)?);
        }
        Ok(out)
    }

    /// Non-draft prescriptions with `from <= issued_at < to`, oldest first.
    pub fn issued_between(&self, from: DateTime<Utc>, to: DateTime<Utc>) -> Result<Vec<Prescription>> {
        self.prescriptions_query(
            "SELECT body FROM prescriptions WHERE issued_at IS NOT NULL AND issued_at >= ?1 AND issued_at < ?2
             ORDER BY issued_at, internal_id",
            params![micros(from), micros(to)],
        )
    }

    pub fn prescriptions_for_patient(&self, patient_id: &PatientId) -> Result<Vec<Prescription>> {
        self.prescriptions_query(
            "SELECT body FROM prescriptions WHERE patient_id = ?1 ORDER BY issued_at, internal_id",
            [patient_id.as_str()],
        )
    }

    /// Materializes expiry for every Issued prescription past its window.
    pub fn expire_sweep(&self, now: DateTime<Utc>) -> Result<usize> {
        let mut issued = self.prescriptions_query(
            "SELECT body FROM prescriptions WHERE status = ?1",
            [PrescriptionStatus::Issued.as_str()],
        )?;
        pedscript_core::expire_sweep(&mut issued, now);
        let mut count = 0;
        for p in issued.iter().filter(|p| p.status == PrescriptionStatus::Expired) {
            if self.transition(p, PrescriptionStatus::Issued)? {
                count += 1;
            }
        }
        Ok(count)
    }
}
