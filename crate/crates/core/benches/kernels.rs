//! Parallel kernels timed on a single-thread pool and on the default pool.
//! Build with `--no-default-features` to time the sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use xxz_quench::dynamics::{measure_series, time_grid};
use xxz_quench::meanfield::solve;
use xxz_quench::measures::{classical_correlation, OptimizerOptions};
use xxz_quench::par::with_threads;
use xxz_quench::quench::prepare_quench;
use xxz_quench::{two_site_state, ModelParams};

fn pools() -> [(&'static str, usize); 2] {
    [("1-thread", 1), ("default", 0)]
}

fn bench_optimizer(c: &mut Criterion) {
    let pre = solve(&ModelParams::unit(0.98, 0.0, 200).unwrap()).unwrap();
    let post = solve(&ModelParams::unit(1.0, 0.0, 200).unwrap()).unwrap();
    let q = prepare_quench(&pre, &post).unwrap();
    let state = two_site_state(&q.correlator_block(1, 7.5).unwrap(), 1).unwrap();
    let opts = OptimizerOptions::default();
    let mut group = c.benchmark_group("classical_correlation");
    for (name, threads) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| with_threads(threads, || classical_correlation(&state, &opts).unwrap()))
        });
    }
    group.finish();
}

fn bench_series(c: &mut Criterion) {
    let pre = solve(&ModelParams::unit(0.0, 0.0, 400).unwrap()).unwrap();
    let post = solve(&ModelParams::unit(1.0, 0.0, 400).unwrap()).unwrap();
    let q = prepare_quench(&pre, &post).unwrap();
    let times = time_grid(10.0, 0.25).unwrap();
    let opts = OptimizerOptions::default();
    let mut group = c.benchmark_group("measure_series");
    group.sample_size(10);
    for (name, threads) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| with_threads(threads, || measure_series(&q, &[1, 2], &times, &opts).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_optimizer, bench_series);
criterion_main!(benches);
