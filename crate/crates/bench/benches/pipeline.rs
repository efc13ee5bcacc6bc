use std::hint::black_box;

use causalqa_bench::{effect_table, sem_columns};
use causalqa_core::engine::effects::estimate_ate;
use causalqa_core::engine::linalg::ols;
use causalqa_core::engine::pc::{learn_graph, DEFAULT_ALPHA};
use causalqa_core::{interpret, ParseContext};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const QUESTIONS: [&str; 3] = [
    "Is there a method to discover every direct influence present in the employee_data.csv dataset?",
    "What is the average effect of labor_participation_rate on wage_increase in employment.csv?",
    "Using housing.csv, what is the optimal action for rent_burden to maximize housing_starts for those having homeownership_rate = 0.57?",
];

fn bench_interpret(c: &mut Criterion) {
    let ctx = ParseContext::default();
    c.bench_function("interpret", |b| {
        b.iter(|| {
            for q in QUESTIONS {
                black_box(interpret(black_box(q), &ctx).unwrap());
            }
        })
    });
}

fn bench_ols(c: &mut Criterion) {
    let mut g = c.benchmark_group("ols");
    for n in [1_000, 10_000] {
        let d = effect_table(5, n, 1);
        let x: Vec<Vec<f64>> = ["s1", "s2", "s3", "s4", "s5", "a"].iter().map(|c| d.numeric(c).unwrap().to_vec()).collect();
        let y = d.numeric("y").unwrap().to_vec();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| ols(black_box(&x), black_box(&y)).unwrap()));
    }
    g.finish();
}

fn bench_pc(c: &mut Criterion) {
    let mut g = c.benchmark_group("pc");
    for j in [5, 8] {
        let (cols, names) = sem_columns(j, 2_000, 3);
        g.bench_with_input(BenchmarkId::from_parameter(j), &j, |b, _| {
            b.iter(|| learn_graph(black_box(&cols), &names, DEFAULT_ALPHA).unwrap())
        });
    }
    g.finish();
}

fn bench_aipw(c: &mut Criterion) {
    let d = effect_table(3, 10_000, 5);
    c.bench_function("aipw_10k", |b| b.iter(|| estimate_ate(black_box(&d), "a", "y").unwrap()));
}

criterion_group!(benches, bench_interpret, bench_ols, bench_pc, bench_aipw);
criterion_main!(benches);
