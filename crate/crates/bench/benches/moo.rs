use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;

use hebo_bench::zdt1;
use hebo_core::moo::{crowding_distance, evolve, non_dominated_sort};
use hebo_core::rng::rng_from;
use hebo_core::MooConfig;

fn sorting(c: &mut Criterion) {
    let mut group = c.benchmark_group("non_dominated_sort");
    for n in [100, 200, 400] {
        let mut rng = rng_from(n as u64, &[]);
        let pop: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| non_dominated_sort(black_box(&pop))));
    }
    group.finish();
    let mut rng = rng_from(9, &[]);
    let front: Vec<Vec<f64>> = (0..200).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
    c.bench_function("crowding_distance_200", |b| b.iter(|| crowding_distance(black_box(&front))));
}

fn evolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("nsga2_zdt1");
    group.sample_size(10);
    for d in [2, 10] {
        let cfg = MooConfig { seed: 1, ..MooConfig::default() };
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| b.iter(|| evolve(zdt1, d, 2, &cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, sorting, evolution);
criterion_main!(benches);
