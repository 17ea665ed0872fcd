use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use slowchain::expm::expm;
use slowchain::{
    classify_states, empirical_distribution, lambda_sweep, limit_jump_matrix, reduced_generator, sample_first_passage,
    Reduction, TimeGrid,
};
use slowchain_bench::{counterexample, point, random_models, three_state};

fn bench_expm(c: &mut Criterion) {
    let mut group = c.benchmark_group("expm");
    for n in [3, 8] {
        let (m, _) = random_models(n, 1).remove(0);
        for lambda in [10.0, 1e4] {
            let g = m.generator_at(lambda).unwrap().matrix() * 0.5;
            group.bench_with_input(BenchmarkId::new(format!("n{n}"), lambda), &g, |b, g| {
                b.iter(|| expm(black_box(g)).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_reduction(c: &mut Criterion) {
    let mut group = c.benchmark_group("reduce");
    for n in [3, 8] {
        let (m, _) = random_models(n, 1).remove(0);
        group.bench_with_input(BenchmarkId::new("analyze", n), &m, |b, m| {
            b.iter(|| Reduction::analyze(black_box(m)).unwrap())
        });
        let p = classify_states(&m).unwrap();
        let ld = limit_jump_matrix(&m, &p).unwrap();
        group.bench_with_input(BenchmarkId::new("reduced_generator", n), &(ld, p), |b, (ld, p)| {
            b.iter(|| reduced_generator(black_box(ld), black_box(p)).unwrap())
        });
    }
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let m = three_state();
    let pi = point(&m, "2");
    let grid = TimeGrid::new(0.0, 20.0, 0.01).unwrap();
    let lambdas = [10.0, 1e2, 1e3, 1e4];
    c.bench_function("lambda_sweep/three_state", |b| {
        b.iter(|| lambda_sweep(black_box(&m), &pi, &grid, &lambdas).unwrap())
    });
}

fn bench_ssa(c: &mut Criterion) {
    let mut group = c.benchmark_group("ssa");
    group.sample_size(10);
    let m = three_state();
    let g = m.generator_at(100.0).unwrap();
    let pi = point(&m, "3");
    group.bench_function("empirical/three_state", |b| {
        b.iter(|| empirical_distribution(&g, &pi, 1.0, 10_000, black_box(1)).unwrap())
    });
    let ce = counterexample();
    let r = Reduction::analyze(&ce).unwrap();
    let start = point(&ce, "1");
    group.bench_function("first_passage/counterexample", |b| {
        b.iter(|| sample_first_passage(&ce, 100.0, &start, &r.partition, 10_000, black_box(1), 1_000_000).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_expm, bench_reduction, bench_sweep, bench_ssa);
criterion_main!(benches);
