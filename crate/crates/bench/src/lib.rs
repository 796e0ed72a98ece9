//! Shared fixtures for the pipeline benchmarks.

use specsense_core::*;

/// Scenario sized like the benchmark workloads: N = 512, k = 26.
pub fn bench_scenario(compression: CompressionSetting, l_total: usize) -> Scenario {
    let s = Scenario {
        n_samples: 512,
        sparsity: Some(26),
        snr_db: 0.0,
        l_total,
        clusters: ClusterSpec::EqualSplit(1),
        trials: 4,
        calibration_trials: 150,
        measure_timing: false,
        threads: Some(1),
        base_seed: 606,
        ..Scenario::default()
    };
    s.at_point(0.0, l_total, compression)
}
