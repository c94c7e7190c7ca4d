//! Weight-based pediatric dosing.
//!
//! The only dose rule implemented is Clark's rule:
//!
//! ```text
//! child dose = weight_lb * adult_dose / 150
//! ```
//!
//! Arithmetic runs in fixed-point decimal so that displayed doses round
//! half-up exactly as a pharmacist would by hand. Inputs arrive as `f64`
//! and are read at 15 significant digits before any arithmetic.

use rust_decimal::prelude::{FromPrimitive, ToPrimitive};
use rust_decimal::{Decimal, RoundingStrategy};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Pounds per kilogram. Every kg/lb conversion in the workspace goes through this.
pub const LB_PER_KG: f64 = 2.20462;

/// Reference adult weight in Clark's rule.
pub const CLARK_REFERENCE_LB: u32 = 150;

/// Upper bound of the pediatric population, in months (18 years).
pub const PEDIATRIC_MAX_MONTHS: f64 = 216.0;

/// Decimal places kept on a displayed dose.
pub const DOSE_DECIMAL_PLACES: u32 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DoseError {
    #[error("age {0} months is outside the pediatric range 0..=216")]
    NotPediatric(f64),
    #[error("weight must be positive, got {0}")]
    NonPositiveWeight(f64),
    #[error("dose amount must be positive, got {0}")]
    NonPositiveDose(f64),
    #[error("dose unit must not be empty")]
    EmptyUnit,
    #[error("value {0} is outside the supported numeric range")]
    OutOfRange(f64),
}

/// Pediatric sub-population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgeBand {
    Neonate,
    Infant,
    Child,
    Adolescent,
}

impl AgeBand {
    /// Lower bound of the band in months (inclusive).
    pub fn lower_months(self) -> f64 {
        match self {
            AgeBand::Neonate => 0.0,
            AgeBand::Infant => 1.0,
            AgeBand::Child => 24.0,
            AgeBand::Adolescent => 144.0,
        }
    }
}

/// Bands are half-open `[lo, hi)` except the last, which is closed at 216.
pub fn classify_age_band(age_months: f64) -> Result<AgeBand, DoseError> {
    if !(0.0..=PEDIATRIC_MAX_MONTHS).contains(&age_months) {
        return Err(DoseError::NotPediatric(age_months));
    }
    Ok(if age_months < 1.0 {
        AgeBand::Neonate
    } else if age_months < 24.0 {
        AgeBand::Infant
    } else if age_months < 144.0 {
        AgeBand::Child
    } else {
        AgeBand::Adolescent
    })
}

/// A body weight in pounds. Always positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct WeightLb(f64);

impl WeightLb {
    pub fn new(value: f64) -> Result<Self, DoseError> {
        if value.is_finite() && value > 0.0 {
            Ok(Self(value))
        } else {
            Err(DoseError::NonPositiveWeight(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Inverse of [`kg_to_lb`], unrounded.
    pub fn to_kg(self) -> f64 {
        self.0 / LB_PER_KG
    }
}

/// Converts kilograms to pounds without rounding.
pub fn kg_to_lb(weight_kg: f64) -> Result<WeightLb, DoseError> {
    if !(weight_kg.is_finite() && weight_kg > 0.0) {
        return Err(DoseError::NonPositiveWeight(weight_kg));
    }
    WeightLb::new(weight_kg * LB_PER_KG)
}

/// The adult reference dose a monograph lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdultDose {
    pub amount: f64,
    pub unit: String,
    pub frequency: String,
}

impl AdultDose {
    pub fn new(amount: f64, unit: impl Into<String>, frequency: impl Into<String>) -> Result<Self, DoseError> {
        let dose = Self {
            amount,
            unit: unit.into(),
            frequency: frequency.into(),
        };
        dose.validate()?;
        Ok(dose)
    }

    pub fn validate(&self) -> Result<(), DoseError> {
        if !(self.amount.is_finite() && self.amount > 0.0) {
            return Err(DoseError::NonPositiveDose(self.amount));
        }
        if self.unit.trim().is_empty() {
            return Err(DoseError::EmptyUnit);
        }
        Ok(())
    }
}

/// Safety annotations attached to a computed dose. Flags never block prescribing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoseFlag {
    ExceedsCap,
    BelowMeasurable,
}

/// A rounded pediatric dose in the unit of the adult dose it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChildDose {
    pub amount: f64,
    pub unit: String,
    #[serde(default)]
    pub flags: Vec<DoseFlag>,
}

fn to_decimal(value: f64) -> Result<Decimal, DoseError> {
    Decimal::from_f64(value).ok_or(DoseError::OutOfRange(value))
}

fn round_decimal(value: Decimal) -> Decimal {
    value.round_dp_with_strategy(DOSE_DECIMAL_PLACES, RoundingStrategy::MidpointAwayFromZero)
}

/// Half-up rounding to two decimal places.
///
/// Values too large for the decimal representation are returned unchanged.
pub fn round_dose(raw_amount: f64) -> f64 {
    match Decimal::from_f64(raw_amount) {
        Some(d) => round_decimal(d).to_f64().unwrap_or(raw_amount),
        None => raw_amount,
    }
}

/// Clark's rule. The result carries `BelowMeasurable` when it rounds to zero.
pub fn clarks_dose(weight: WeightLb, adult: &AdultDose) -> Result<ChildDose, DoseError> {
    WeightLb::new(weight.0)?;
    adult.validate()?;

    let w = to_decimal(weight.0)?;
    let a = to_decimal(adult.amount)?;
    let raw = w
        .checked_mul(a)
        .and_then(|p| p.checked_div(Decimal::from(CLARK_REFERENCE_LB)))
        .ok_or(DoseError::OutOfRange(weight.0 * adult.amount))?;
    let rounded = round_decimal(raw);
    let amount = rounded.to_f64().ok_or(DoseError::OutOfRange(weight.0 * adult.amount))?;

    let mut dose = ChildDose {
        amount,
        unit: adult.unit.clone(),
        flags: Vec::new(),
    };
    dose.flags = check_dose_cap(&dose, None);
    Ok(dose)
}

/// Flags a dose against an optional monograph cap (same unit as the dose).
pub fn check_dose_cap(dose: &ChildDose, monograph_cap: Option<f64>) -> Vec<DoseFlag> {
    let mut flags = Vec::new();
    if let Some(cap) = monograph_cap {
        if dose.amount > cap {
            flags.push(DoseFlag::ExceedsCap);
        }
    }
    if round_dose(dose.amount) == 0.0 {
        flags.push(DoseFlag::BelowMeasurable);
    }
    flags
}
