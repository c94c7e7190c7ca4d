//! Fixed-width printable prescription for hand delivery when the network is down.

use chrono::SecondsFormat;
use pedscript_core::{DoseFlag, LifecycleError, Prescription, PrescriptionStatus};
use pedscript_store::Patient;
use serde::{Deserialize, Serialize};

pub const WIDTH: usize = 80;
pub const CODE_PREFIX: &str = "RX CODE: ";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrintableDocument {
    pub lines: Vec<String>,
}

impl PrintableDocument {
    pub fn to_text(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

struct Builder {
    lines: Vec<String>,
}

impl Builder {
    fn rule(&mut self, c: char) {
        self.lines.push(c.to_string().repeat(WIDTH));
    }

    fn centered(&mut self, text: &str) {
        let pad = WIDTH.saturating_sub(text.len()) / 2;
        self.lines.push(format!("{}{}", " ".repeat(pad), text));
    }

    /// `label: value`, wrapping the value under itself.
    fn field(&mut self, indent: usize, label: &str, value: &str) {
        let head = format!("{}{label}: ", " ".repeat(indent));
        let hang = " ".repeat(head.len());
        let opts = textwrap::Options::new(WIDTH).initial_indent(&head).subsequent_indent(&hang);
        let value = if value.trim().is_empty() { "-" } else { value };
        for line in textwrap::wrap(value, opts) {
            self.lines.push(line.trim_end().to_owned());
        }
    }
}

fn flag_text(flag: DoseFlag) -> &'static str {
    match flag {
        DoseFlag::ExceedsCap => "EXCEEDS MONOGRAPH CAP",
        DoseFlag::BelowMeasurable => "BELOW MEASURABLE DOSE",
    }
}

/// Renders an issued (or later) prescription. Output depends only on the
/// inputs, so identical inputs give identical bytes.
pub fn render(p: &Prescription, patient: &Patient, prescriber_name: &str) -> Result<PrintableDocument, LifecycleError> {
    if p.status == PrescriptionStatus::Draft {
        return Err(LifecycleError::NotIssued);
    }
    let (Some(code), Some(issued_at), Some(valid_until)) = (&p.code, p.issued_at, p.valid_until()) else {
        return Err(LifecycleError::NotIssued);
    };

    let mut b = Builder { lines: Vec::new() };
    b.rule('=');
    b.centered("PEDIATRIC PRESCRIPTION");
    b.rule('=');
    b.lines.push(format!("{CODE_PREFIX}{code}"));
    b.field(0, "Read aloud as", &code.grouped());
    b.field(0, "Prescriber ID", p.prescriber_id.as_str());
    b.field(0, "Prescriber", prescriber_name);
    b.field(0, "Patient", &patient.full_name);
    b.field(0, "Date of birth", &patient.date_of_birth.to_string());
    b.field(0, "Weight", &format!("{:.2} kg", patient.weight_kg));
    b.field(0, "Issued", &issued_at.to_rfc3339_opts(SecondsFormat::Secs, true));
    b.field(0, "Valid until", &valid_until.to_rfc3339_opts(SecondsFormat::Secs, true));
    b.field(0, "Diagnosis", &p.diagnosis);
    if !p.symptoms.is_empty() {
        b.field(0, "Symptoms", &p.symptoms);
    }
    b.rule('-');
    for (n, item) in p.items.iter().enumerate() {
        b.field(0, &format!("{}. Drug", n + 1), &format!("{} ({})", item.drug_name, item.drug_id));
        let dose = &item.computed_child_dose;
        b.field(3, "Dose", &format!("{:.2} {}", dose.amount, dose.unit));
        b.field(3, "Frequency", &item.frequency);
        let days = if item.duration_days == 1 { "day" } else { "days" };
        b.field(3, "Duration", &format!("{} {days}", item.duration_days));
        b.field(3, "Route", &item.route);
        if !item.notes.is_empty() {
            b.field(3, "Notes", &item.notes);
        }
        if !dose.flags.is_empty() {
            let flags: Vec<&str> = dose.flags.iter().map(|f| flag_text(*f)).collect();
            b.field(3, "Flags", &flags.join(", "));
        }
    }
    b.rule('-');
    b.field(0, "Note", "Present this document at the dispensing pharmacy. Valid for 72 hours from issue.");
    Ok(PrintableDocument { lines: b.lines })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{NaiveDate, TimeZone, Utc};
    use pedscript_core::{clarks_dose, AdultDose, PrescriptionCode, PrescriptionItem, WeightLb};

    fn patient() -> Patient {
        Patient {
            patient_id: "pt".into(),
            full_name: "Adaeze Okafor".into(),
            date_of_birth: NaiveDate::from_ymd_opt(2022, 5, 4).unwrap(),
            weight_kg: 16.0,
            sex: "F".into(),
            allergens: vec![],
            adr_history: vec![],
            family_history_notes: String::new(),
            guardian_contact: String::new(),
            registered_at: Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap(),
            active: true,
        }
    }

    fn draft() -> Prescription {
        let adult = AdultDose::new(250.0, "mg", "every 8 hours").unwrap();
        let item = PrescriptionItem {
            drug_id: "amox".into(),
            drug_name: "Amoxicillin".into(),
            computed_child_dose: clarks_dose(WeightLb::new(22.0).unwrap(), &adult).unwrap(),
            adult_reference_dose: adult,
            frequency: "every 8 hours".into(),
            duration_days: 7,
            route: "oral".into(),
            notes: "long note ".repeat(20),
        };
        Prescription::draft("rx".into(), "pt".into(), "dr-7".into(), "otitis-media", vec![item])
    }

    #[test]
    fn contains_required_fields_within_width() {
        let code = PrescriptionCode::parse("00000000000").unwrap();
        let p = draft().issue(code, Utc.with_ymd_and_hms(2026, 5, 4, 10, 0, 0).unwrap()).unwrap();
        let doc = render(&p, &patient(), "dr.bello").unwrap();
        let text = doc.to_text();
        assert!(doc.lines.iter().all(|l| l.chars().count() <= WIDTH));
        assert!(doc.lines.iter().any(|l| l == "RX CODE: 00000000000"));
        for needle in ["dr-7", "Adaeze Okafor", "36.67 mg", "every 8 hours", "7 days", "2026-05-04T10:00:00Z"] {
            assert!(text.contains(needle), "missing {needle}");
        }
        assert_eq!(text, render(&p, &patient(), "dr.bello").unwrap().to_text());
    }

    #[test]
    fn drafts_cannot_be_printed() {
        assert_eq!(render(&draft(), &patient(), "dr"), Err(LifecycleError::NotIssued));
    }
}
