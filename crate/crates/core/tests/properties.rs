use chrono::{DateTime, Duration, TimeZone, Utc};
use pedscript_core::dosing::LB_PER_KG;
use pedscript_core::formulary::DrugMonograph;
use pedscript_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn adult(amount: f64) -> AdultDose {
    AdultDose::new(amount, "mg", "daily").unwrap()
}

// Linearity holds up to one rounding step: |round(2x) - 2 round(x)| <= 0.01.
const ROUNDING_STEP: f64 = 0.01 + 1e-9;

proptest! {
    #[test]
    fn identity_at_reference_weight(amount in 0.01f64..5000.0) {
        let d = clarks_dose(WeightLb::new(150.0).unwrap(), &adult(amount)).unwrap();
        prop_assert_eq!(d.amount, round_dose(amount));
    }

    #[test]
    fn linear_in_weight(w in 0.5f64..300.0, amount in 0.01f64..5000.0) {
        let one = clarks_dose(WeightLb::new(w).unwrap(), &adult(amount)).unwrap().amount;
        let two = clarks_dose(WeightLb::new(2.0 * w).unwrap(), &adult(amount)).unwrap().amount;
        prop_assert!((two - 2.0 * one).abs() <= ROUNDING_STEP, "{} vs {}", two, one);
    }

    #[test]
    fn linear_in_adult_dose(w in 0.5f64..300.0, amount in 0.01f64..5000.0) {
        let one = clarks_dose(WeightLb::new(w).unwrap(), &adult(amount)).unwrap().amount;
        let two = clarks_dose(WeightLb::new(w).unwrap(), &adult(2.0 * amount)).unwrap().amount;
        prop_assert!((two - 2.0 * one).abs() <= ROUNDING_STEP);
    }

    #[test]
    fn monotone_in_weight(a in 0.5f64..300.0, b in 0.5f64..300.0, amount in 0.01f64..5000.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let d_lo = clarks_dose(WeightLb::new(lo).unwrap(), &adult(amount)).unwrap();
        let d_hi = clarks_dose(WeightLb::new(hi).unwrap(), &adult(amount)).unwrap();
        prop_assert!(d_lo.amount <= d_hi.amount);
    }

    #[test]
    fn unit_preserved(w in 0.5f64..300.0, unit in "[a-zA-Z/]{1,8}") {
        let dose = AdultDose::new(10.0, unit.clone(), "daily").unwrap();
        prop_assert_eq!(clarks_dose(WeightLb::new(w).unwrap(), &dose).unwrap().unit, unit);
    }

    #[test]
    fn kg_lb_round_trip(kg in 0.001f64..500.0) {
        let back = kg_to_lb(kg).unwrap().to_kg();
        prop_assert!(((back - kg) / kg).abs() < 1e-9);
    }

    #[test]
    fn rounding_is_within_half_step(x in 0.0001f64..10_000.0) {
        prop_assert!((round_dose(x) - x).abs() <= 0.005 + 1e-9);
    }

    #[test]
    fn bands_monotone(a in 0.0f64..=216.0, b in 0.0f64..=216.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(classify_age_band(lo).unwrap() <= classify_age_band(hi).unwrap());
    }

    #[test]
    fn any_single_substitution_is_caught(seed in any::<u64>(), pos in 0usize..11, shift in 1u8..32) {
        let code = generate_code(&mut ChaCha20Rng::seed_from_u64(seed));
        let mut bytes = code.as_str().as_bytes().to_vec();
        let v = code::char_value(bytes[pos]).unwrap();
        bytes[pos] = code::ALPHABET[((v + shift) % 32) as usize];
        prop_assert!(!code_checksum_valid(std::str::from_utf8(&bytes).unwrap()));
    }

    #[test]
    fn allergen_order_does_not_matter(mut allergens in proptest::collection::vec("[a-c ]{1,4}", 0..6)) {
        let m = monograph(0, vec!["a".into(), "b".into(), "ab".into()], vec!["x".into()]);
        let forward = allergy_conflicts(&m, &allergens);
        allergens.reverse();
        prop_assert_eq!(forward, allergy_conflicts(&m, &allergens));
    }

    #[test]
    fn indication_search_matches_scan(
        shape in proptest::collection::vec((proptest::collection::vec(0usize..6, 1..4), "[A-Z][a-z]{2,6}"), 0..50),
        probe in 0usize..7,
    ) {
        let codes = ["otitis-media", "fever", "pneumonia", "uti", "asthma", "malaria", "gout"];
        let records: Vec<DrugMonograph> = shape
            .iter()
            .enumerate()
            .map(|(i, (ind, name))| {
                let mut m = monograph(i, vec!["x".into()], ind.iter().map(|&k| codes[k].to_uppercase()).collect());
                m.name = name.clone();
                m
            })
            .collect();
        let f = Formulary::from_records(records.clone(), "test").unwrap();

        // brute-force oracle over the raw records
        let mut expected: Vec<(String, String)> = records
            .iter()
            .filter(|m| m.indications.iter().any(|i| i.to_lowercase() == codes[probe]))
            .map(|m| (m.name.clone(), m.drug_id.0.clone()))
            .collect();
        expected.sort();
        let got: Vec<(String, String)> = f
            .find_by_indication(codes[probe])
            .into_iter()
            .map(|m| (m.name.clone(), m.drug_id.0.clone()))
            .collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn formulary_round_trip(n in 0usize..20) {
        let records: Vec<DrugMonograph> = (0..n).map(|i| monograph(i, vec!["y".into()], vec!["fever".into()])).collect();
        let f = Formulary::from_records(records, "v").unwrap();
        let again = Formulary::load(f.to_json().as_bytes()).unwrap();
        prop_assert_eq!(f.monographs().collect::<Vec<_>>(), again.monographs().collect::<Vec<_>>());
    }
}

fn monograph(i: usize, ingredients: Vec<String>, indications: Vec<String>) -> DrugMonograph {
    DrugMonograph {
        drug_id: DrugId(format!("drug-{i:03}")),
        name: format!("Drug {i}"),
        ingredients,
        indications,
        adult_dose: adult(100.0),
        route: "oral".into(),
        max_child_dose: None,
        contraindication_notes: String::new(),
    }
}

#[test]
fn clark_hand_values() {
    // 13.6078 kg is 30 lb to four decimals
    let w = kg_to_lb(13.6078).unwrap();
    assert!((w.value() - 30.0).abs() < 1e-3);
    let d = clarks_dose(w, &adult(150.0)).unwrap();
    assert_eq!(d.amount, 30.0);
    assert!((LB_PER_KG - 2.20462).abs() < f64::EPSILON);
}

fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 1, 10, 12, 0, 0).unwrap()
}

fn prescription_in(status: PrescriptionStatus) -> Prescription {
    let adult = adult(150.0);
    let item = PrescriptionItem {
        drug_id: "d".into(),
        drug_name: "D".into(),
        computed_child_dose: clarks_dose(WeightLb::new(30.0).unwrap(), &adult).unwrap(),
        adult_reference_dose: adult,
        frequency: "daily".into(),
        duration_days: 3,
        route: "oral".into(),
        notes: String::new(),
    };
    let draft = Prescription::draft("rx".into(), "pt".into(), "dr".into(), "fever", vec![item]);
    let code = generate_code(&mut ChaCha20Rng::seed_from_u64(1));
    match status {
        PrescriptionStatus::Draft => draft,
        PrescriptionStatus::Issued => draft.issue(code, t0()).unwrap(),
        PrescriptionStatus::Dispensed => draft.issue(code, t0()).unwrap().dispense("ph".into(), t0()).unwrap(),
        PrescriptionStatus::Expired => draft.issue(code, t0()).unwrap().expire(t0() + Duration::hours(72)).unwrap(),
    }
}

#[test]
fn terminal_states_stay_terminal() {
    let code = generate_code(&mut ChaCha20Rng::seed_from_u64(2));
    for st in [PrescriptionStatus::Dispensed, PrescriptionStatus::Expired] {
        let p = prescription_in(st);
        for now in [t0(), t0() + Duration::hours(100)] {
            assert!(p.issue(code.clone(), now).is_err());
            assert!(p.dispense("ph".into(), now).is_err());
            assert!(p.expire(now).is_err());
            let mut list = vec![p.clone()];
            assert_eq!(expire_sweep(&mut list, now), 0);
            assert_eq!(list[0], p);
        }
    }
}
