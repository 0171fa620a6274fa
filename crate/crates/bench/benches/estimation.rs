use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use swdft_bench::study_signal;
use swdft_core::estimation::{estimate_local_signal, EstimateOptions, SearchMode};
use swdft_core::transform::swdft_sliding;

fn estimate(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate");
    group.sample_size(20);
    let x = study_signal(11.0, 0.5, 3);
    for n in [8usize, 16, 32] {
        let g = swdft_sliding(&x, n).unwrap();
        let exhaustive = EstimateOptions {
            parallel: false,
            ..EstimateOptions::default()
        };
        let random = EstimateOptions {
            search: SearchMode::Randomized { budget: 300, seed: 1 },
            ..exhaustive.clone()
        };
        group.bench_with_input(BenchmarkId::new("exhaustive", n), &g, |b, g| {
            b.iter(|| estimate_local_signal(black_box(g), &exhaustive).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("random300", n), &g, |b, g| {
            b.iter(|| estimate_local_signal(black_box(g), &random).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, estimate);
criterion_main!(benches);
