use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use joulewire_bench::reference_chain;
use joulewire_core::{
    solve_floating_exact, solve_sommerfeld, transmission_at, ExactSettings, FloatingProblem,
};

fn transmission(c: &mut Criterion) {
    let mut group = c.benchmark_group("transmission_at");
    for n in [4, 30, 100] {
        let (model, _) = reference_chain(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &model, |b, m| {
            b.iter(|| transmission_at(black_box(m), black_box(0.0)).unwrap())
        });
    }
    group.finish();
}

fn sommerfeld(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_sommerfeld");
    for n in [4, 30, 100] {
        let (model, leads) = reference_chain(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &(model, leads), |b, (m, l)| {
            b.iter(|| {
                let p = FloatingProblem::new(m, l).unwrap();
                solve_sommerfeld(black_box(&p)).unwrap()
            })
        });
    }
    group.finish();
}

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_floating_exact");
    group.sample_size(10);
    for n in [1, 2] {
        let (model, leads) = reference_chain(n).unwrap();
        let settings = ExactSettings::default();
        group.bench_with_input(BenchmarkId::from_parameter(n), &(model, leads), |b, (m, l)| {
            b.iter(|| solve_floating_exact(black_box(m), l, &settings).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, transmission, sommerfeld, exact);
criterion_main!(benches);
