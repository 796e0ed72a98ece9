//! End-to-end pipeline checks: trial reproducibility, sweep assembly and
//! results-file round trips.

use rand_chacha::rand_core::SeedableRng;
use specsense_core::*;

fn scenario() -> Scenario {
    Scenario {
        n_samples: 64,
        sparsity: Some(3),
        compression_ratio: Some(0.5),
        l_total: 6,
        clusters: ClusterSpec::EqualSplit(3),
        snr_db: 8.0,
        trials: 12,
        calibration_trials: 200,
        base_seed: 5150,
        measure_timing: false,
        threads: Some(2),
        ..Scenario::default()
    }
}

#[test]
fn trials_reproduce_bit_identically() {
    let s = scenario();
    for hyp in [Hypothesis::Present, Hypothesis::Absent] {
        let a = run_trial(&s, 7, hyp).unwrap();
        let b = run_trial(&s, 7, hyp).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn standalone_trial_matches_context_trial() {
    let s = scenario();
    let ctx = build_point_context(&s).unwrap();
    let standalone = run_trial(&s, 3, Hypothesis::Present).unwrap();
    let in_context = run_trial_in_context(&ctx, 3, Hypothesis::Present).unwrap();
    assert_eq!(standalone, in_context);
}

#[test]
fn global_decision_is_reproducible_from_the_record() {
    let s = scenario();
    let ctx = build_point_context(&s).unwrap();
    for t in 0..6 {
        let record = run_trial_in_context(&ctx, t, Hypothesis::Present).unwrap();
        let votes: Vec<Decision> = record
            .cluster_decisions
            .as_ref()
            .unwrap()
            .iter()
            .map(|(_, d)| *d)
            .collect();
        assert_eq!(
            fuse_values(&votes, record.global.rule_used).unwrap(),
            record.global.value
        );
        // and each cluster vote follows from its members' decisions
        let topo = assign_clusters(s.l_total, &s.clusters).unwrap();
        for ((cluster_id, vote), cluster) in record
            .cluster_decisions
            .as_ref()
            .unwrap()
            .iter()
            .zip(topo.clusters())
        {
            assert_eq!(*cluster_id, cluster.id);
            let member_votes: Vec<Decision> = record
                .su_decisions
                .iter()
                .filter(|d| cluster.members.contains(&d.su_id))
                .map(|d| d.value)
                .collect();
            assert_eq!(fuse_values(&member_votes, s.fusion_rule).unwrap(), *vote);
        }
    }
}

#[test]
fn local_decisions_match_their_statistics() {
    let s = scenario();
    let ctx = build_point_context(&s).unwrap();
    let record = run_trial_in_context(&ctx, 2, Hypothesis::Present).unwrap();
    for d in &record.su_decisions {
        let expected = if d.statistic >= ctx.threshold.value {
            Decision::Occupied
        } else {
            Decision::Free
        };
        assert_eq!(d.value, expected);
    }
}

#[test]
fn sweep_emits_parseable_files_in_both_formats() {
    let mut s = scenario();
    s.sweep = Some(SweepAxes {
        snr_db: Some(vec![0.0, 10.0]),
        l_total: None,
        compression_ratio: Some(vec![
            CompressionSetting::Ratio(0.5),
            CompressionSetting::BYPASS,
        ]),
    });
    let grid = SweepGrid::resolve(&s).unwrap();
    let table = run_sweep(&s, &grid).unwrap();
    assert_eq!(table.rows.len(), 4);

    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("results.csv");
    let json_path = dir.path().join("results.json");
    emit_results(&table, OutputFormat::Csv, &csv_path).unwrap();
    emit_results(&table, OutputFormat::Json, &json_path).unwrap();

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), RESULTS_CSV_HEADER);
    assert_eq!(lines.count(), 4);

    let rows: Vec<ResultsRow> =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(rows, table.rows);

    // bypass rows carry ratio 1 and the same sample count
    assert_eq!(table.rows[1].compression_ratio, 1.0);
    assert_eq!(table.rows[0].compression_ratio, 0.5);
}

#[test]
fn timing_columns_are_zero_when_timing_is_off() {
    let s = scenario();
    let grid = SweepGrid::resolve(&s).unwrap();
    let table = run_sweep(&s, &grid).unwrap();
    let row = &table.rows[0];
    assert_eq!(row.t_total_ms, 0.0);
    assert_eq!(row.t_recover_ms, 0.0);
}

#[test]
fn timing_columns_are_populated_when_timing_is_on() {
    let mut s = scenario();
    s.measure_timing = true;
    s.trials = 6;
    let grid = SweepGrid::resolve(&s).unwrap();
    let table = run_sweep(&s, &grid).unwrap();
    let row = &table.rows[0];
    assert!(row.t_total_ms > 0.0);
    assert!(row.t_total_ms + 1e-9 >= row.t_recover_ms);
}

#[test]
fn weak_sus_are_dropped_from_fusion() {
    // Put the discard threshold right at the noise floor so roughly half of
    // the free-channel trials lose SUs, and verify the retained set obeys
    // the per-SU powers.
    let mut s = scenario();
    s.discard_delta = s.noise_variance();
    let ctx = build_point_context(&s).unwrap();
    let mut saw_discard = false;
    for t in 0..40 {
        let record = run_trial_in_context(&ctx, t, Hypothesis::Absent).unwrap();
        if record.retained.len() < s.l_total {
            saw_discard = true;
        }
        assert_eq!(record.su_decisions.len(), record.retained.len());
    }
    assert!(saw_discard, "discard threshold at the noise floor never fired");
}

#[test]
fn high_snr_operating_point_detects_nearly_always() {
    let s = Scenario {
        n_samples: 64,
        sparsity: Some(3),
        snr_db: 15.0,
        compression_ratio: Some(0.5),
        l_total: 10,
        clusters: ClusterSpec::EqualSplit(1),
        fading: FadingKind::Rayleigh,
        calibration_trials: 1000,
        measure_timing: false,
        ..Scenario::default()
    };
    let ctx = build_point_context(&s).unwrap();
    let trials = 1000u64;
    let detections: u64 = (0..trials)
        .map(|t| {
            let record = run_trial_in_context(&ctx, t, Hypothesis::Present).unwrap();
            u64::from(record.global.value == Decision::Occupied)
        })
        .sum();
    assert!(detections >= 990, "{detections}/{trials} detections at 15 dB");
}

#[test]
fn recovery_is_faster_from_compressed_measurements() {
    // Paired-measurement oracle: recovering from 10% of the samples beats
    // recovering from all of them on identical inputs.
    let n = 512;
    let signal = generate_pu_signal(n, 16, 42).unwrap();
    let obs = SuObservation {
        su_id: SuId(0),
        measured_power: signal.nominal_power(),
        samples: signal.time_samples().to_vec(),
        hypothesis: Hypothesis::Present,
        channel: ChannelRealization::noiseless_unit(0.0),
    };
    let stop = StopRule::with_max_sparsity(16);
    let mut medians = Vec::new();
    for (kind, m) in [(MatrixKind::AicPm1, n / 10), (MatrixKind::Identity, n)] {
        let matrix = build_sensing_matrix(kind, m, n, 3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let meas = acquire(&matrix, &obs, 0.0, &mut rng).unwrap();
        matrix.fourier_dictionary(); // shared cache, built outside the timer
        let timing = time_stage(
            Stage::Recover,
            || {
                std::hint::black_box(recover_sparse(&meas, &matrix, &stop).unwrap());
            },
            5,
        );
        medians.push(timing.wall_time_ms);
    }
    assert!(
        medians[0] < medians[1],
        "compressed recovery {:.3} ms not faster than full-rate {:.3} ms",
        medians[0],
        medians[1]
    );
}

#[test]
fn manual_threshold_skips_calibration() {
    let mut s = scenario();
    s.manual_threshold = Some(1e-3);
    s.calibration_trials = 0; // would fail validation if calibration ran
    let ctx = build_point_context(&s).unwrap();
    assert_eq!(ctx.threshold.value, 1e-3);
    assert_eq!(ctx.threshold.calibration, ThresholdProvenance::Manual);
}
