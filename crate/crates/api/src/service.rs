//! Request orchestration over the core and store crates. Everything here is
//! synchronous and runs on the blocking pool.

use std::collections::{BTreeMap, BTreeSet};

use axum::http::StatusCode;
use chrono::{DateTime, Utc};
use pedscript_core::{
    allergy_conflicts, check_dose_cap, clarks_dose, kg_to_lb, normalize_term, AllergyConflict, ChildDose, DoseFlag,
    DrugId, DrugMonograph, Formulary, LifecycleError, PatientId, Prescription, PrescriptionCode, PrescriptionId,
    PrescriptionItem, PrescriptionStatus, UserId,
};
use pedscript_store::{Patient, StoreError};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::error::ApiError;
use crate::state::AppState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionEntry {
    pub monograph: DrugMonograph,
    pub proposed_child_dose: ChildDose,
    pub conflicts: Vec<AllergyConflict>,
    pub flags: Vec<DoseFlag>,
}

/// Clark's-rule dose for this patient, with cap and measurability flags.
pub fn dose_for(patient: &Patient, monograph: &DrugMonograph) -> Result<ChildDose, ApiError> {
    let mut dose = clarks_dose(kg_to_lb(patient.weight_kg)?, &monograph.adult_dose)?;
    dose.flags = check_dose_cap(&dose, monograph.max_child_dose);
    Ok(dose)
}

pub fn suggestions(formulary: &Formulary, patient: &Patient, diagnosis: &str) -> Result<Vec<SuggestionEntry>, ApiError> {
    formulary
        .find_by_indication(diagnosis)
        .into_iter()
        .map(|m| {
            let dose = dose_for(patient, m)?;
            Ok(SuggestionEntry {
                monograph: m.clone(),
                flags: dose.flags.clone(),
                proposed_child_dose: dose,
                conflicts: allergy_conflicts(m, &patient.allergens),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ItemRequest {
    pub drug_id: DrugId,
    pub duration_days: u32,
    #[serde(default)]
    pub frequency: Option<String>,
    #[serde(default)]
    pub route: Option<String>,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PrescribeRequest {
    pub patient_id: PatientId,
    pub diagnosis: String,
    #[serde(default)]
    pub symptoms: String,
    pub items: Vec<ItemRequest>,
    /// Keyed by drug_id; required for every item with an allergy conflict.
    #[serde(default)]
    pub override_reasons: BTreeMap<DrugId, String>,
}

const MAX_CODE_ATTEMPTS: usize = 4;

pub fn prescribe(state: &AppState, prescriber: &UserId, req: PrescribeRequest, now: DateTime<Utc>) -> Result<Prescription, ApiError> {
    if req.items.is_empty() {
        return Err(LifecycleError::EmptyPrescription.into());
    }
    let diagnosis = normalize_term(&req.diagnosis);
    if diagnosis.is_empty() {
        return Err(ApiError::validation("diagnosis", "must not be empty"));
    }
    let patient = state.store.get_patient(&req.patient_id)?;
    let formulary = state.formulary();

    let mut items = Vec::with_capacity(req.items.len());
    let mut needs_override: Vec<&DrugId> = Vec::new();
    for (i, it) in req.items.iter().enumerate() {
        if it.duration_days == 0 {
            return Err(ApiError::validation(format!("items[{i}].duration_days"), "must be at least 1"));
        }
        let m = formulary.get_monograph(&it.drug_id)?;
        let conflicts = allergy_conflicts(m, &patient.allergens);
        let mut notes = it.notes.trim().to_owned();
        if !conflicts.is_empty() {
            match req.override_reasons.get(&it.drug_id).map(|r| r.trim()) {
                Some(reason) if !reason.is_empty() => {
                    let allergens: Vec<&str> = conflicts.iter().map(|c| c.patient_allergen.as_str()).collect();
                    if !notes.is_empty() {
                        notes.push_str("; ");
                    }
                    notes.push_str(&format!("allergy override ({}): {reason}", allergens.join(", ")));
                }
                _ => needs_override.push(&it.drug_id),
            }
        }
        items.push(PrescriptionItem {
            drug_id: m.drug_id.clone(),
            drug_name: m.name.clone(),
            adult_reference_dose: m.adult_dose.clone(),
            computed_child_dose: dose_for(&patient, m)?,
            frequency: it.frequency.clone().unwrap_or_else(|| m.adult_dose.frequency.clone()),
            duration_days: it.duration_days,
            route: it.route.clone().unwrap_or_else(|| m.route.clone()),
            notes,
        });
    }
    if !needs_override.is_empty() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "allergy_override_required",
            "items conflict with recorded allergies; an override reason is required for each",
        )
        .with_field("override_reasons")
        .with_details(serde_json::json!({ "drug_ids": needs_override })));
    }

    let mut draft = Prescription::draft(
        PrescriptionId(Uuid::new_v4().to_string()),
        patient.patient_id.clone(),
        prescriber.clone(),
        diagnosis,
        items,
    );
    draft.symptoms = req.symptoms.trim().to_owned();

    let mut rng = rand::rng();
    for _ in 0..MAX_CODE_ATTEMPTS {
        let issued = draft.issue(PrescriptionCode::generate(&mut rng), now)?;
        match state.store.store_prescription(&issued) {
            Ok(()) => return Ok(issued),
            Err(StoreError::DuplicateCode) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(ApiError::internal("could not allocate a unique prescription code"))
}

/// What the pharmacist sees after entering a code. The verdict is computed
/// at request time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrescriptionView {
    pub prescription: Prescription,
    pub patient_name: String,
    pub valid: bool,
    pub valid_until: Option<DateTime<Utc>>,
    pub checked_at: DateTime<Utc>,
}

fn parse_code(text: &str) -> Result<PrescriptionCode, ApiError> {
    PrescriptionCode::parse_entry(text).map_err(|_| StoreError::MalformedCode.into())
}

pub fn lookup(state: &AppState, code_text: &str, now: DateTime<Utc>) -> Result<PrescriptionView, ApiError> {
    let code = parse_code(code_text)?;
    let prescription = state.store.fetch_by_code(code.as_str())?;
    let patient = state.store.get_patient(&prescription.patient_id)?;
    Ok(PrescriptionView {
        valid: prescription.is_valid_at(now)?,
        valid_until: prescription.valid_until(),
        patient_name: patient.full_name,
        prescription,
        checked_at: now,
    })
}

/// Dispenses with compare-and-set on status; concurrent callers get exactly
/// one success. Late dispense attempts also materialize the Expired status.
pub fn dispense(state: &AppState, code_text: &str, pharmacist: &UserId, now: DateTime<Utc>) -> Result<Prescription, ApiError> {
    let code = parse_code(code_text)?;
    let current = state.store.fetch_by_code(code.as_str())?;
    match current.dispense(pharmacist.clone(), now) {
        Ok(next) => {
            if state.store.transition(&next, PrescriptionStatus::Issued)? {
                Ok(next)
            } else {
                let latest = state.store.fetch_by_code(code.as_str())?;
                Err(match latest.status {
                    PrescriptionStatus::Expired => LifecycleError::ExpiredPrescription,
                    _ => LifecycleError::AlreadyDispensed,
                }
                .into())
            }
        }
        Err(LifecycleError::ExpiredPrescription) => {
            if let Ok(expired) = current.expire(now) {
                state.store.transition(&expired, PrescriptionStatus::Issued)?;
            }
            Err(LifecycleError::ExpiredPrescription.into())
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPeriod {
    pub from: DateTime<Utc>,
    pub to: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub diagnosis: String,
    pub prescription_count: usize,
    pub distinct_drug_count: usize,
}

/// Aggregate counts only; carries no patient identifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinistryReport {
    pub period: ReportPeriod,
    pub rows: Vec<ReportRow>,
}

/// Groups prescriptions issued in `[from, to)` by diagnosis, sorted by diagnosis.
pub fn aggregate_report(prescriptions: &[Prescription], from: DateTime<Utc>, to: DateTime<Utc>) -> MinistryReport {
    let mut groups: BTreeMap<&str, (usize, BTreeSet<&DrugId>)> = BTreeMap::new();
    for p in prescriptions {
        let Some(issued_at) = p.issued_at else { continue };
        if issued_at < from || issued_at >= to {
            continue;
        }
        let entry = groups.entry(p.diagnosis.as_str()).or_default();
        entry.0 += 1;
        entry.1.extend(p.items.iter().map(|i| &i.drug_id));
    }
    MinistryReport {
        period: ReportPeriod { from, to },
        rows: groups
            .into_iter()
            .map(|(diagnosis, (count, drugs))| ReportRow {
                diagnosis: diagnosis.to_owned(),
                prescription_count: count,
                distinct_drug_count: drugs.len(),
            })
            .collect(),
    }
}

pub fn ministry_report(state: &AppState, from: DateTime<Utc>, to: DateTime<Utc>) -> Result<MinistryReport, ApiError> {
    if from >= to {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "invalid_period", "`from` must be before `to`").with_field("from"));
    }
    let prescriptions = state.store.issued_between(from, to)?;
    Ok(aggregate_report(&prescriptions, from, to))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, TimeZone};
    use pedscript_core::{clarks_dose, AdultDose, WeightLb};

    fn rx(diagnosis: &str, drugs: &[&str], issued_at: DateTime<Utc>) -> Prescription {
        let adult = AdultDose::new(100.0, "mg", "daily").unwrap();
        let items = drugs
            .iter()
            .map(|d| PrescriptionItem {
                drug_id: (*d).into(),
                drug_name: d.to_uppercase(),
                computed_child_dose: clarks_dose(WeightLb::new(30.0).unwrap(), &adult).unwrap(),
                adult_reference_dose: adult.clone(),
                frequency: "daily".into(),
                duration_days: 1,
                route: "oral".into(),
                notes: String::new(),
            })
            .collect();
        Prescription::draft(Uuid::new_v4().to_string().into(), "p".into(), "u".into(), diagnosis, items)
            .issue(PrescriptionCode::parse("00000000000").unwrap(), issued_at)
            .unwrap()
    }

    #[test]
    fn report_groups_by_diagnosis() {
        let t = Utc.with_ymd_and_hms(2026, 4, 1, 0, 0, 0).unwrap();
        let set = vec![
            rx("malaria", &["art", "para"], t),
            rx("malaria", &["art"], t + Duration::hours(1)),
            rx("otitis-media", &["amox"], t + Duration::hours(2)),
            rx("fever", &["para"], t + Duration::days(30)),
        ];
        let report = aggregate_report(&set, t, t + Duration::days(1));
        assert_eq!(
            report.rows,
            vec![
                ReportRow {
                    diagnosis: "malaria".into(),
                    prescription_count: 2,
                    distinct_drug_count: 2
                },
                ReportRow {
                    diagnosis: "otitis-media".into(),
                    prescription_count: 1,
                    distinct_drug_count: 1
                },
            ]
        );
        assert!(aggregate_report(&set, t - Duration::days(9), t - Duration::days(8)).rows.is_empty());
        // `to` is exclusive
        assert_eq!(aggregate_report(&set, t, t + Duration::hours(1)).rows[0].prescription_count, 1);
    }
}
