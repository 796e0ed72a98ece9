//! Stage benchmarks: acquisition, recovery at several compression ratios,
//! and one full trial.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use specsense_bench::bench_scenario;
use specsense_core::*;

fn observation(n: usize, seed: u64) -> (SparseSpectrumSignal, SuObservation) {
    let signal = generate_pu_signal(n, 26, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbeef);
    let channel = draw_channel(0.0, FadingKind::AwgnOnly, signal.nominal_power(), &mut rng)
        .unwrap();
    let obs = observe(&signal, &channel, Hypothesis::Present, SuId(0), &mut rng);
    (signal, obs)
}

fn bench_acquire(c: &mut Criterion) {
    let n = 512;
    let (_, obs) = observation(n, 1);
    let mut group = c.benchmark_group("acquire");
    for ratio in [0.1f64, 0.5] {
        let m = (n as f64 * ratio).round() as usize;
        let matrix = build_sensing_matrix(MatrixKind::AicPm1, m, n, 7).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(ratio), &matrix, |b, matrix| {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            b.iter(|| black_box(acquire(matrix, &obs, 0.0, &mut rng).unwrap()));
        });
    }
    group.finish();
}

fn bench_recover(c: &mut Criterion) {
    let n = 512;
    let (_, obs) = observation(n, 2);
    let stop = StopRule::with_max_sparsity(26);
    let mut group = c.benchmark_group("recover");
    group.sample_size(20);
    for ratio in [0.1f64, 0.5, 1.0] {
        let m = (n as f64 * ratio).round() as usize;
        let kind = if ratio == 1.0 { MatrixKind::Identity } else { MatrixKind::AicPm1 };
        let matrix = build_sensing_matrix(kind, m, n, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let meas = acquire(&matrix, &obs, 0.0, &mut rng).unwrap();
        matrix.fourier_dictionary(); // build the cache outside the timing loop
        group.bench_with_input(
            BenchmarkId::from_parameter(ratio),
            &(meas, matrix),
            |b, (meas, matrix)| {
                b.iter(|| black_box(recover_sparse(meas, matrix, &stop).unwrap()));
            },
        );
    }
    group.finish();
}

fn bench_full_trial(c: &mut Criterion) {
    let mut group = c.benchmark_group("trial");
    group.sample_size(10);
    for (label, setting) in [
        ("ratio_0.1", CompressionSetting::Ratio(0.1)),
        ("ratio_0.5", CompressionSetting::Ratio(0.5)),
        ("bypass", CompressionSetting::BYPASS),
    ] {
        let scenario = bench_scenario(setting, 10);
        let ctx = build_point_context(&scenario).unwrap();
        group.bench_function(label, |b| {
            let mut trial = 0u64;
            b.iter(|| {
                trial += 1;
                black_box(run_trial_in_context(&ctx, trial, Hypothesis::Present).unwrap())
            });
        });
    }
    group.finish();
}

criterion_group!(benches, bench_acquire, bench_recover, bench_full_trial);
criterion_main!(benches);
