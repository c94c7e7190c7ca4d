//! Drug knowledge base loaded from a local JSON document.
//!
//! The document is a top-level array of monograph records. Unknown fields are
//! rejected. Ingredient and indication strings are normalized to trimmed
//! lowercase on load, so lookups and allergy checks compare normalized text.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dosing::{AdultDose, DoseError};

#[derive(Debug, Error)]
pub enum FormularyError {
    #[error("formulary parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("formulary read error: {0}")]
    Io(#[from] std::io::Error),
    #[error("duplicate drug_id {drug_id:?} at record {index}")]
    DuplicateDrugId { drug_id: String, index: usize },
    #[error("invalid record {index} ({drug_id:?}): {reason}")]
    InvalidRecord {
        index: usize,
        drug_id: String,
        reason: String,
    },
    #[error("unknown drug {0:?}")]
    UnknownDrug(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DrugId(pub String);

impl DrugId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DrugId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for DrugId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrugMonograph {
    pub drug_id: DrugId,
    pub name: String,
    pub ingredients: Vec<String>,
    pub indications: Vec<String>,
    pub adult_dose: AdultDose,
    pub route: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_child_dose: Option<f64>,
    #[serde(default)]
    pub contraindication_notes: String,
}

/// Trim and lowercase. Used for indication codes, ingredients and allergens.
pub fn normalize_term(s: &str) -> String {
    s.trim().to_lowercase()
}

impl DrugMonograph {
    fn normalize(&mut self) {
        for s in self.ingredients.iter_mut().chain(self.indications.iter_mut()) {
            *s = normalize_term(s);
        }
    }

    fn check(&self) -> Result<(), String> {
        if self.drug_id.0.trim().is_empty() {
            return Err("drug_id is empty".into());
        }
        if self.name.trim().is_empty() {
            return Err("name is empty".into());
        }
        if self.ingredients.is_empty() || self.ingredients.iter().any(String::is_empty) {
            return Err("ingredients must be a non-empty list of non-empty strings".into());
        }
        if self.indications.is_empty() || self.indications.iter().any(String::is_empty) {
            return Err("indications must be a non-empty list of non-empty strings".into());
        }
        self.adult_dose.validate().map_err(|e: DoseError| format!("adult_dose: {e}"))?;
        if let Some(cap) = self.max_child_dose {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(format!("max_child_dose must be positive, got {cap}"));
            }
        }
        Ok(())
    }

    pub fn treats(&self, normalized_indication: &str) -> bool {
        self.indications.iter().any(|i| i == normalized_indication)
    }
}

/// An immutable, loaded formulary.
#[derive(Debug, Clone)]
pub struct Formulary {
    monographs: BTreeMap<DrugId, DrugMonograph>,
    version: String,
    loaded_at: DateTime<Utc>,
}

/// Patient allergen that matches one of a drug's ingredients.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AllergyConflict {
    pub drug_id: DrugId,
    pub matched_ingredient: String,
    pub patient_allergen: String,
}

impl Formulary {
    /// Parses a formulary document. The version is a content digest of the raw bytes.
    pub fn load<R: Read>(mut source: R) -> Result<Self, FormularyError> {
        let mut bytes = Vec::new();
        source.read_to_end(&mut bytes)?;
        let records: Vec<DrugMonograph> = serde_json::from_slice(&bytes).map_err(|e| FormularyError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let digest = Sha256::digest(&bytes);
        Self::from_records(records, format!("sha256:{}", &hex::encode(digest)[..16]))
    }

    pub fn from_records(records: Vec<DrugMonograph>, version: impl Into<String>) -> Result<Self, FormularyError> {
        let mut monographs = BTreeMap::new();
        for (index, mut m) in records.into_iter().enumerate() {
            m.normalize();
            m.check().map_err(|reason| FormularyError::InvalidRecord {
                index,
                drug_id: m.drug_id.0.clone(),
                reason,
            })?;
            if monographs.contains_key(&m.drug_id) {
                return Err(FormularyError::DuplicateDrugId {
                    drug_id: m.drug_id.0,
                    index,
                });
            }
            monographs.insert(m.drug_id.clone(), m);
        }
        Ok(Self {
            monographs,
            version: version.into(),
            loaded_at: Utc::now(),
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn loaded_at(&self) -> DateTime<Utc> {
        self.loaded_at
    }

    pub fn len(&self) -> usize {
        self.monographs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monographs.is_empty()
    }

    pub fn monographs(&self) -> impl Iterator<Item = &DrugMonograph> {
        self.monographs.values()
    }

    /// Emits the formulary as a document `load` accepts.
    pub fn to_json(&self) -> String {
        let records: Vec<&DrugMonograph> = self.monographs.values().collect();
        serde_json::to_string_pretty(&records).expect("monographs serialize")
    }

    /// Exact match on the normalized indication code, sorted by name then drug_id.
    pub fn find_by_indication(&self, indication: &str) -> Vec<&DrugMonograph> {
        let wanted = normalize_term(indication);
        let mut hits: Vec<&DrugMonograph> = self.monographs.values().filter(|m| m.treats(&wanted)).collect();
        hits.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.drug_id.cmp(&b.drug_id)));
        hits
    }

    pub fn get_monograph(&self, drug_id: &DrugId) -> Result<&DrugMonograph, FormularyError> {
        self.monographs
            .get(drug_id)
            .ok_or_else(|| FormularyError::UnknownDrug(drug_id.0.clone()))
    }
}

/// One conflict per (ingredient, allergen) pair equal after normalization.
/// Output is sorted, so it does not depend on allergen order.
pub fn allergy_conflicts<S: AsRef<str>>(m: &DrugMonograph, allergens: &[S]) -> Vec<AllergyConflict> {
    let mut conflicts: Vec<AllergyConflict> = Vec::new();
    for allergen in allergens {
        let allergen = normalize_term(allergen.as_ref());
        if allergen.is_empty() {
            continue;
        }
        for ingredient in &m.ingredients {
            if normalize_term(ingredient) == allergen {
                conflicts.push(AllergyConflict {
                    drug_id: m.drug_id.clone(),
                    matched_ingredient: ingredient.clone(),
                    patient_allergen: allergen.clone(),
                });
            }
        }
    }
    conflicts.sort();
    conflicts.dedup();
    conflicts
}
