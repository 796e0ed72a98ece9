//! Monte Carlo simulator and analytics library for cluster-based cooperative
//! spectrum sensing with compressive acquisition.
//!
//! A population of secondary users observes one licensed channel through
//! independent fading channels. Each SU's samples are compressed by a ±1
//! pseudo-random (or Gaussian/Toeplitz/circulant) sensing matrix, the sparse
//! spectrum is recovered by orthogonal greedy pursuit, and the maximum bin of
//! the recovered power spectral density is compared against a calibrated
//! threshold. Local verdicts are combined at cluster heads and a fusion
//! center. The crate provides:
//!
//! - [`signal`]: sparse transmitter signals, fading channels, observations;
//! - [`acquisition`]: sensing matrices and compressed measurements;
//! - [`recovery`]: greedy sparse recovery, PSD estimation, threshold
//!   calibration and the local decision;
//! - [`fusion`]: cluster topology, weak-SU discarding, decision combining
//!   and the closed-form cooperative detection analytics;
//! - [`metrics`]: trial counting, rate estimates and stage timing;
//! - [`experiment`]: scenario config, deterministic parallel Monte Carlo
//!   sweeps and CSV/JSON results emission.
//!
//! Everything is deterministic given a scenario and base seed: trials own
//! ChaCha streams addressed by trial index, so results are byte-identical
//! regardless of worker count.

pub mod acquisition;
mod dft;
pub mod error;
pub mod experiment;
pub mod fusion;
pub mod metrics;
pub mod recovery;
mod seeding;
pub mod signal;

pub use error::{Error, Result};

pub use acquisition::{
    acquire, build_sensing_matrix, compression_ratio_of, MatrixId, MatrixKind, Measurements,
    SensingMatrix,
};
pub use experiment::{
    build_point_context, emit_results, render_csv, render_json, run_sweep, run_trial,
    run_trial_in_context, CompressionSetting, HeadForwards, OutputFormat, PointContext,
    ResultsRow, ResultsTable, Scenario, StageTimings, SweepAxes, SweepGrid, TrialRecord,
    RESULTS_CSV_HEADER,
};
pub use fusion::{
    assign_clusters, cluster_coop_prob, coop_pd, coop_pfa, discard_weak, fuse_decisions,
    fuse_values, global_coop_prob, max_snr_pdf, Cluster, ClusterId, ClusterSpec, ClusterTopology,
    DiscardPolicy, FusionRule, GlobalDecision, QuadratureSettings,
};
pub use metrics::{
    empirical_rates, error_probability, time_stage, time_stage_samples, RateEstimates, Stage,
    StageTiming, TrialCounts,
};
pub use recovery::{
    calibrate_threshold, detect, estimate_psd, h0_statistic, recover_sparse,
    threshold_from_statistics, CalibrationConfig, Decision, DetectionThreshold, LocalDecision,
    PsdEstimate, RecoveredSpectrum, StopRule, ThresholdProvenance,
};
pub use signal::{
    draw_channel, generate_pu_signal, mean_power, observe, signal_power, ChannelRealization,
    FadingKind, Hypothesis, SparseSpectrumSignal, SuId, SuObservation,
};
