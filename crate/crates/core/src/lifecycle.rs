//! Prescription state machine.
//!
//! ```text
//! Draft --issue--> Issued --dispense--> Dispensed
//!                    |
//!                    +----expire----> Expired
//! ```
//!
//! Dispensed and Expired are terminal. A prescription is valid for
//! exactly 72 hours after `issued_at`; the boundary instant is already late.
//! Transitions take `&self` and return a new value.

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::PrescriptionCode;
use crate::dosing::{AdultDose, ChildDose};
use crate::formulary::DrugId;
use crate::ids::{PatientId, PrescriptionId, UserId};

pub const VALIDITY_HOURS: i64 = 72;

pub fn validity_window() -> Duration {
    Duration::hours(VALIDITY_HOURS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrescriptionStatus {
    Draft,
    Issued,
    Dispensed,
    Expired,
}

impl PrescriptionStatus {
    pub const ALL: [PrescriptionStatus; 4] = [Self::Draft, Self::Issued, Self::Dispensed, Self::Expired];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Draft => "draft",
            Self::Issued => "issued",
            Self::Dispensed => "dispensed",
            Self::Expired => "expired",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|st| st.as_str() == s)
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, Self::Dispensed | Self::Expired)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LifecycleError {
    #[error("prescription has no items")]
    EmptyPrescription,
    #[error("illegal transition {action} from {from:?}")]
    IllegalTransition { from: PrescriptionStatus, action: &'static str },
    #[error("prescription has not been issued")]
    NotIssued,
    #[error("prescription was already dispensed")]
    AlreadyDispensed,
    #[error("prescription has expired")]
    ExpiredPrescription,
    #[error("prescription is still within its validity window")]
    StillValid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrescriptionItem {
    pub drug_id: DrugId,
    /// Snapshot of the monograph name at issue time.
    pub drug_name: String,
    pub adult_reference_dose: AdultDose,
    /// Frozen at issue time; never recomputed from later weights.
    pub computed_child_dose: ChildDose,
    pub frequency: String,
    pub duration_days: u32,
    pub route: String,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prescription {
    pub internal_id: PrescriptionId,
    pub code: Option<PrescriptionCode>,
    pub patient_id: PatientId,
    pub prescriber_id: UserId,
    /// Normalized diagnosis code used for formulary matching and reporting.
    pub diagnosis: String,
    /// Free-text symptom notes entered by the prescriber.
    #[serde(default)]
    pub symptoms: String,
    pub items: Vec<PrescriptionItem>,
    pub status: PrescriptionStatus,
    pub issued_at: Option<DateTime<Utc>>,
    pub dispensed_at: Option<DateTime<Utc>>,
    pub dispensing_pharmacist_id: Option<UserId>,
}

impl Prescription {
    pub fn draft(
        internal_id: PrescriptionId,
        patient_id: PatientId,
        prescriber_id: UserId,
        diagnosis: impl Into<String>,
        items: Vec<PrescriptionItem>,
    ) -> Self {
        Self {
            internal_id,
            code: None,
            patient_id,
            prescriber_id,
            diagnosis: diagnosis.into(),
            symptoms: String::new(),
            items,
            status: PrescriptionStatus::Draft,
            issued_at: None,
            dispensed_at: None,
            dispensing_pharmacist_id: None,
        }
    }

    pub fn issue(&self, code: PrescriptionCode, now: DateTime<Utc>) -> Result<Prescription, LifecycleError> {
        if self.status != PrescriptionStatus::Draft {
            return Err(LifecycleError::IllegalTransition {
                from: self.status,
                action: "issue",
            });
        }
        if self.items.is_empty() {
            return Err(LifecycleError::EmptyPrescription);
        }
        Ok(Prescription {
            code: Some(code),
            status: PrescriptionStatus::Issued,
            issued_at: Some(now),
            ..self.clone()
        })
    }

    /// Instant at which the prescription stops being dispensable.
    pub fn valid_until(&self) -> Option<DateTime<Utc>> {
        self.issued_at.map(|t| t + validity_window())
    }

    pub fn is_valid_at(&self, now: DateTime<Utc>) -> Result<bool, LifecycleError> {
        match (self.status, self.valid_until()) {
            (PrescriptionStatus::Draft, _) | (_, None) => Err(LifecycleError::NotIssued),
            (PrescriptionStatus::Issued, Some(until)) => Ok(now < until),
            _ => Ok(false),
        }
    }

    pub fn dispense(&self, pharmacist_id: UserId, now: DateTime<Utc>) -> Result<Prescription, LifecycleError> {
        match self.status {
            PrescriptionStatus::Dispensed => Err(LifecycleError::AlreadyDispensed),
            PrescriptionStatus::Expired => Err(LifecycleError::ExpiredPrescription),
            PrescriptionStatus::Draft => Err(LifecycleError::IllegalTransition {
                from: self.status,
                action: "dispense",
            }),
            PrescriptionStatus::Issued => {
                if !self.is_valid_at(now)? {
                    return Err(LifecycleError::ExpiredPrescription);
                }
                Ok(Prescription {
                    status: PrescriptionStatus::Dispensed,
                    dispensed_at: Some(now),
                    dispensing_pharmacist_id: Some(pharmacist_id),
                    ..self.clone()
                })
            }
        }
    }

    /// Issued → Expired, only once the window has closed.
    pub fn expire(&self, now: DateTime<Utc>) -> Result<Prescription, LifecycleError> {
        if self.status != PrescriptionStatus::Issued {
            return Err(LifecycleError::IllegalTransition {
                from: self.status,
                action: "expire",
            });
        }
        if self.is_valid_at(now)? {
            return Err(LifecycleError::StillValid);
        }
        Ok(Prescription {
            status: PrescriptionStatus::Expired,
            ..self.clone()
        })
    }
}

/// Expires every Issued prescription whose window has closed. Returns the
/// number of transitions; a second run at the same instant returns 0.
pub fn expire_sweep(prescriptions: &mut [Prescription], now: DateTime<Utc>) -> usize {
    let mut count = 0;
    for p in prescriptions.iter_mut() {
        if let Ok(expired) = p.expire(now) {
            *p = expired;
            count += 1;
        }
    }
    count
}
