//! EHR records.

use chrono::{DateTime, Datelike, Months, NaiveDate, Utc};
use pedscript_core::dosing::PEDIATRIC_MAX_MONTHS;
use pedscript_core::{normalize_term, DrugId, PatientId};
use serde::{Deserialize, Serialize};

use crate::error::{Result, StoreError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdrEntry {
    pub drug_id: DrugId,
    pub note: String,
    pub recorded_at: DateTime<Utc>,
}

/// Registration payload: a patient without an id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewPatient {
    pub full_name: String,
    pub date_of_birth: NaiveDate,
    pub weight_kg: f64,
    #[serde(default)]
    pub sex: String,
    #[serde(default)]
    pub allergens: Vec<String>,
    #[serde(default)]
    pub family_history_notes: String,
    #[serde(default)]
    pub guardian_contact: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patient {
    pub patient_id: PatientId,
    pub full_name: String,
    pub date_of_birth: NaiveDate,
    pub weight_kg: f64,
    pub sex: String,
    pub allergens: Vec<String>,
    pub adr_history: Vec<AdrEntry>,
    pub family_history_notes: String,
    pub guardian_contact: String,
    pub registered_at: DateTime<Utc>,
    pub active: bool,
}

impl Patient {
    pub fn age_months_at(&self, now: DateTime<Utc>) -> f64 {
        age_in_months(self.date_of_birth, now.date_naive())
    }
}

/// Calendar months elapsed since `dob`, plus the elapsed fraction of the
/// current month. Negative when `today` precedes `dob`.
pub fn age_in_months(dob: NaiveDate, today: NaiveDate) -> f64 {
    if today < dob {
        return -((dob - today).num_days() as f64) / 30.4375;
    }
    let mut whole = (today.year() - dob.year()) * 12 + today.month() as i32 - dob.month() as i32;
    let anchor = |m: i32| dob.checked_add_months(Months::new(m as u32)).expect("date in range");
    if anchor(whole) > today {
        whole -= 1;
    }
    let start = anchor(whole);
    let next = anchor(whole + 1);
    let frac = (today - start).num_days() as f64 / (next - start).num_days() as f64;
    whole as f64 + frac
}

impl NewPatient {
    pub(crate) fn into_patient(self, patient_id: PatientId, now: DateTime<Utc>) -> Result<Patient> {
        let full_name = self.full_name.trim().to_owned();
        if full_name.is_empty() {
            return Err(StoreError::ValidationFailed {
                field: "full_name",
                reason: "must not be empty".into(),
            });
        }
        if !(self.weight_kg.is_finite() && self.weight_kg > 0.0) {
            return Err(StoreError::ValidationFailed {
                field: "weight_kg",
                reason: format!("must be positive, got {}", self.weight_kg),
            });
        }
        let age_months = age_in_months(self.date_of_birth, now.date_naive());
        if age_months < 0.0 {
            return Err(StoreError::ValidationFailed {
                field: "date_of_birth",
                reason: "is in the future".into(),
            });
        }
        if age_months > PEDIATRIC_MAX_MONTHS {
            return Err(StoreError::NotPediatric { age_months });
        }
        let mut allergens: Vec<String> = self
            .allergens
            .iter()
            .map(|a| normalize_term(a))
            .filter(|a| !a.is_empty())
            .collect();
        allergens.sort();
        allergens.dedup();
        Ok(Patient {
            patient_id,
            full_name,
            date_of_birth: self.date_of_birth,
            weight_kg: self.weight_kg,
            sex: self.sex,
            allergens,
            adr_history: Vec::new(),
            family_history_notes: self.family_history_notes,
            guardian_contact: self.guardian_contact,
            registered_at: now,
            active: true,
        })
    }
}
