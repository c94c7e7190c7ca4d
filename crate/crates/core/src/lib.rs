//! Core domain logic for the pediatric e-prescribing service.
//!
//! Everything here is pure: no I/O beyond reading a formulary stream, no
//! clocks, no shared state. The store and HTTP layers build on these types.

pub mod code;
pub mod dosing;
pub mod formulary;
pub mod ids;
pub mod lifecycle;

pub use code::{code_checksum_valid, generate_code, MalformedCode, PrescriptionCode};
pub use dosing::{
    check_dose_cap, clarks_dose, classify_age_band, kg_to_lb, round_dose, AdultDose, AgeBand, ChildDose, DoseError,
    DoseFlag, WeightLb,
};
pub use formulary::{allergy_conflicts, normalize_term, AllergyConflict, DrugId, DrugMonograph, Formulary, FormularyError};
pub use ids::{PatientId, PrescriptionId, UserId};
pub use lifecycle::{expire_sweep, LifecycleError, Prescription, PrescriptionItem, PrescriptionStatus};
