//! Throughput of disorder-averaged workloads through the rayon path versus
//! the always-available sequential path. Both produce bit-identical results
//! (per-task seeds); the interesting number is the speedup.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use pspin_core::exact::{exact_summary, pn_sample, ExactGates};
use pspin_core::model::{sample_disorder, ModelParams};
use pspin_core::parallel::{map_tasks, map_tasks_seq};

fn bench_pn_samples(c: &mut Criterion) {
    let params = ModelParams::new(12, 3, 0.05, 0.5).unwrap();
    let gates = ExactGates::default();
    let mut group = c.benchmark_group("pn_samples_48_draws");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            black_box(map_tasks(48, |i| {
                pn_sample(&params, i as u64, &gates).unwrap()
            }))
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            black_box(map_tasks_seq(48, |i| {
                pn_sample(&params, i as u64, &gates).unwrap()
            }))
        })
    });
    group.finish();
}

fn bench_two_point_sweeps(c: &mut Criterion) {
    let params = ModelParams::new(14, 3, 0.05, 0.5).unwrap();
    let gates = ExactGates::default();
    let draw = |i: usize| {
        let d = sample_disorder(&params, i as u64).unwrap();
        exact_summary(&d, &params, true, &gates).unwrap().log_z
    };
    let mut group = c.benchmark_group("two_point_sweeps_16_draws");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(map_tasks(16, draw)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(map_tasks_seq(16, draw)))
    });
    group.finish();
}

criterion_group!(benches, bench_pn_samples, bench_two_point_sweeps);
criterion_main!(benches);
