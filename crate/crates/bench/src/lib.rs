//! Shared inputs for the benchmarks.

use pedscript_core::{AdultDose, DrugId, DrugMonograph, Formulary};

const INDICATIONS: [&str; 8] = ["fever", "malaria", "otitis-media", "pneumonia", "uti", "asthma", "pain", "tonsillitis"];

/// A formulary of `n` monographs, each listing two of eight indications.
pub fn synthetic_formulary(n: usize) -> Formulary {
    let records = (0..n)
        .map(|i| DrugMonograph {
            drug_id: DrugId(format!("drug-{i:05}")),
            name: format!("Drug {}", n - i),
            ingredients: vec![format!("ingredient-{i}"), "excipient".into()],
            indications: vec![INDICATIONS[i % 8].into(), INDICATIONS[(i / 8) % 8].into()],
            adult_dose: AdultDose::new(100.0 + i as f64, "mg", "daily").expect("positive dose"),
            route: "oral".into(),
            max_child_dose: Some(250.0),
            contraindication_notes: String::new(),
        })
        .collect();
    Formulary::from_records(records, "synthetic").expect("unique ids")
}
