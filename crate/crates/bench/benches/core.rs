use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pedscript_bench::synthetic_formulary;
use pedscript_core::{allergy_conflicts, clarks_dose, code_checksum_valid, generate_code, kg_to_lb, AdultDose, DrugId};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn dosing(c: &mut Criterion) {
    let adult = AdultDose::new(250.0, "mg", "every 8 hours").unwrap();
    c.bench_function("clarks_dose", |b| {
        b.iter(|| clarks_dose(kg_to_lb(black_box(13.6078)).unwrap(), black_box(&adult)).unwrap())
    });
}

fn codes(c: &mut Criterion) {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    c.bench_function("generate_code", |b| b.iter(|| generate_code(&mut rng)));
    let code = generate_code(&mut rng);
    c.bench_function("code_checksum_valid", |b| b.iter(|| code_checksum_valid(black_box(code.as_str()))));
}

fn formulary(c: &mut Criterion) {
    let mut group = c.benchmark_group("find_by_indication");
    for n in [50, 500, 5000] {
        let f = synthetic_formulary(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| {
            b.iter(|| f.find_by_indication(black_box("Otitis-Media")).len())
        });
    }
    group.finish();

    let f = synthetic_formulary(50);
    let m = f.get_monograph(&DrugId("drug-00007".into())).unwrap();
    let allergens = ["Excipient ", "penicillin", "sulfa"];
    c.bench_function("allergy_conflicts", |b| b.iter(|| allergy_conflicts(m, black_box(&allergens))));
}

criterion_group!(benches, dosing, codes, formulary);
criterion_main!(benches);
