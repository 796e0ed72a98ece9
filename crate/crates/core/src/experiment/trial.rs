//! The per-trial sensing pipeline: generate, observe, discard, acquire,
//! recover, detect, fuse.

use rand::Rng;
use std::time::Instant;

use crate::acquisition::{acquire, build_sensing_matrix, MatrixKind, Measurements, SensingMatrix};
use crate::error::Result;
use crate::experiment::scenario::{HeadForwards, Scenario};
use crate::fusion::{
    assign_clusters, discard_weak, fuse_values, ClusterId, ClusterTopology, DiscardPolicy,
    FusionRule, GlobalDecision,
};
use crate::recovery::{
    calibrate_threshold, detect, recover_sparse, CalibrationConfig, Decision, DetectionThreshold,
    LocalDecision, PsdEstimate,
};
use crate::seeding;
use crate::signal::{draw_channel, generate_pu_signal, observe, Hypothesis, SuId};

const POINT_SALT: u64 = 0x706f696e74;
const CALIBRATION_SALT: u64 = 0x63616c6962;

/// Sensing matrices of one sweep point: one shared matrix, or one per SU.
#[derive(Debug)]
enum MatrixSet {
    Shared(SensingMatrix),
    PerSu(Vec<SensingMatrix>),
}

impl MatrixSet {
    fn for_su(&self, su: SuId) -> &SensingMatrix {
        match self {
            MatrixSet::Shared(m) => m,
            MatrixSet::PerSu(ms) => &ms[su.0 as usize],
        }
    }
}

/// Immutable state shared by every trial of one sweep point: the topology,
/// the sensing matrices and the calibrated (or manual) threshold.
#[derive(Debug)]
pub struct PointContext {
    pub scenario: Scenario,
    pub topology: ClusterTopology,
    pub threshold: DetectionThreshold,
    matrices: MatrixSet,
    point_seed: u64,
}

impl PointContext {
    pub fn matrix_for(&self, su: SuId) -> &SensingMatrix {
        self.matrices.for_su(su)
    }

    pub fn point_seed(&self) -> u64 {
        self.point_seed
    }
}

fn effective_matrix_kind(scenario: &Scenario) -> MatrixKind {
    if scenario.bypass_compression {
        MatrixKind::Identity
    } else {
        scenario.matrix_kind
    }
}

/// Seed for threshold calibration. Depends only on the per-SU pipeline
/// (noise level, acquisition, recovery settings), never on the SU count or
/// fusion layout, so configurations that share a pipeline share a threshold.
fn calibration_seed(scenario: &Scenario, m: usize, calibration_noise_variance: f64) -> u64 {
    seeding::mix_all(&[
        CALIBRATION_SALT,
        scenario.base_seed,
        scenario.n_samples as u64,
        m as u64,
        effective_matrix_kind(scenario) as u64,
        scenario.matrix_seed,
        calibration_noise_variance.to_bits(),
        scenario.compression_noise_variance.to_bits(),
        scenario.resolved_max_sparsity() as u64,
        scenario.residual_tol.to_bits(),
        scenario.target_pfa.to_bits(),
        scenario.calibration_trials as u64,
        u64::from(scenario.bypass_compression),
    ])
}

fn point_seed(scenario: &Scenario, m: usize) -> u64 {
    seeding::mix_all(&[
        POINT_SALT,
        scenario.base_seed,
        scenario.n_samples as u64,
        scenario.resolved_sparsity() as u64,
        scenario.snr_db.to_bits(),
        scenario.l_total as u64,
        m as u64,
        u64::from(scenario.bypass_compression),
    ])
}

/// Builds the shared state for one sweep point, calibrating the threshold
/// unless the scenario pins a manual one.
pub fn build_point_context(scenario: &Scenario) -> Result<PointContext> {
    scenario.validate()?;
    let topology = assign_clusters(scenario.l_total, &scenario.clusters)?;
    let m = scenario.measurement_rows()?;
    let n = scenario.n_samples;
    let kind = effective_matrix_kind(scenario);
    let matrices = if scenario.per_su_matrix_seeds && !scenario.bypass_compression {
        let ms = (0..scenario.l_total)
            .map(|su| {
                build_sensing_matrix(kind, m, n, seeding::mix2(scenario.matrix_seed, su as u64))
            })
            .collect::<Result<Vec<_>>>()?;
        MatrixSet::PerSu(ms)
    } else {
        MatrixSet::Shared(build_sensing_matrix(kind, m, n, scenario.matrix_seed)?)
    };
    let threshold = match scenario.manual_threshold {
        Some(value) => DetectionThreshold::manual(value)?,
        None => {
            // Without compression noise the noise-only statistic scales
            // exactly with the noise variance, so one unit-variance
            // calibration serves every noise floor; the threshold is then
            // floor-proportional, CFAR style. Sweeps over SNR reuse a single
            // quantile estimate instead of re-drawing it per point, which
            // keeps the calibration error common to all points.
            let scalable = scenario.compression_noise_variance == 0.0;
            let calibration_noise = if scalable { 1.0 } else { scenario.noise_variance() };
            let cfg = CalibrationConfig {
                target_pfa: scenario.target_pfa,
                noise_variance: calibration_noise,
                compression_noise_variance: scenario.compression_noise_variance,
                stop: scenario.stop_rule(),
                skip_acquire: scenario.bypass_compression,
                n_trials: scenario.calibration_trials,
                seed: calibration_seed(scenario, m, calibration_noise),
            };
            let mut threshold = calibrate_threshold(&cfg, matrices.for_su(SuId(0)))
                .map_err(|e| e.in_context("threshold calibration"))?;
            if scalable {
                threshold.value *= scenario.noise_variance();
            }
            threshold
        }
    };
    Ok(PointContext {
        topology,
        threshold,
        matrices,
        point_seed: point_seed(scenario, m),
        scenario: scenario.clone(),
    })
}

/// Wall-clock stage times of one trial, in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub acquire_ms: f64,
    pub recover_ms: f64,
    pub detect_ms: f64,
    pub fuse_ms: f64,
    pub total_ms: f64,
}

/// Everything one trial decided, with enough provenance to replay it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub hypothesis: Hypothesis,
    /// Local decisions of the retained SUs, ascending by id.
    pub su_decisions: Vec<LocalDecision>,
    pub retained: Vec<SuId>,
    /// Every SU fell below the discard threshold; the channel is then
    /// reported free by default.
    pub all_discarded: bool,
    /// Per-cluster fused decisions (absent when heads forward measurements).
    pub cluster_decisions: Option<Vec<(ClusterId, Decision)>>,
    pub global: GlobalDecision,
    pub timings: Option<StageTimings>,
}

fn hypothesis_lane(hypothesis: Hypothesis) -> u64 {
    match hypothesis {
        Hypothesis::Absent => 0,
        Hypothesis::Present => 1,
    }
}

/// Runs one trial standalone. Sweeps build the context once and use
/// `run_trial_in_context`; results are identical either way.
pub fn run_trial(
    scenario: &Scenario,
    trial_index: u64,
    hypothesis: Hypothesis,
) -> Result<TrialRecord> {
    let ctx = build_point_context(scenario)?;
    run_trial_in_context(&ctx, trial_index, hypothesis)
}

/// Executes the full pipeline for one trial of one sweep point.
pub fn run_trial_in_context(
    ctx: &PointContext,
    trial_index: u64,
    hypothesis: Hypothesis,
) -> Result<TrialRecord> {
    let s = &ctx.scenario;
    let mut rng = seeding::trial_rng(ctx.point_seed, trial_index, hypothesis_lane(hypothesis));
    let timing = s.measure_timing;
    let t_start = timing.then(Instant::now);

    let signal_seed: u64 = rng.random();
    let signal = generate_pu_signal(s.n_samples, s.resolved_sparsity(), signal_seed)?;
    let channel_power = if signal.nominal_power() > 0.0 {
        signal.nominal_power()
    } else {
        s.reference_power
    };

    let observations: Vec<_> = (0..s.l_total)
        .map(|su| {
            let channel = draw_channel(s.snr_db, s.fading, channel_power, &mut rng)?;
            Ok(observe(&signal, &channel, hypothesis, SuId(su as u32), &mut rng))
        })
        .collect::<Result<Vec<_>>>()?;

    let powers: Vec<(SuId, f64)> = observations
        .iter()
        .map(|o| (o.su_id, o.measured_power))
        .collect();
    let retained = discard_weak(&powers, &DiscardPolicy::new(s.discard_delta)?);

    if retained.is_empty() {
        let total_ms = t_start.map(|t| t.elapsed().as_secs_f64() * 1e3);
        return Ok(TrialRecord {
            trial_index,
            hypothesis,
            su_decisions: Vec::new(),
            retained,
            all_discarded: true,
            cluster_decisions: None,
            global: GlobalDecision {
                value: Decision::Free,
                contributing: Vec::new(),
                rule_used: s.fusion_rule,
            },
            timings: total_ms.map(|t| StageTimings {
                total_ms: t,
                ..StageTimings::default()
            }),
        });
    }

    // Acquisition: compress each retained SU's observation, or hand the raw
    // samples through under the identity reference when bypassing.
    let t0 = timing.then(Instant::now);
    let measurements: Vec<Measurements> = retained
        .iter()
        .map(|&su| {
            let obs = &observations[su.0 as usize];
            let matrix = ctx.matrix_for(su);
            if s.bypass_compression {
                Measurements::from_values(su, obs.samples.clone(), matrix.id(), 0.0)
            } else {
                acquire(matrix, obs, s.compression_noise_variance, &mut rng)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let acquire_ms = t0.map(|t| t.elapsed().as_secs_f64() * 1e3).unwrap_or(0.0);

    let t0 = timing.then(Instant::now);
    let stop = s.stop_rule();
    let recovered: Vec<_> = measurements
        .iter()
        .map(|meas| recover_sparse(meas, ctx.matrix_for(meas.su_id), &stop))
        .collect::<Result<Vec<_>>>()?;
    let recover_ms = t0.map(|t| t.elapsed().as_secs_f64() * 1e3).unwrap_or(0.0);

    let t0 = timing.then(Instant::now);
    let su_decisions: Vec<LocalDecision> = recovered
        .iter()
        .zip(retained.iter())
        .map(|(rec, &su)| {
            let psd = PsdEstimate::from_sparse_spectrum(rec.coefficients())?;
            Ok(detect(su, &psd, &ctx.threshold))
        })
        .collect::<Result<Vec<_>>>()?;
    let detect_ms = t0.map(|t| t.elapsed().as_secs_f64() * 1e3).unwrap_or(0.0);

    let t0 = timing.then(Instant::now);
    let (cluster_decisions, global) = fuse_trial(s, ctx, &su_decisions)?;
    let fuse_ms = t0.map(|t| t.elapsed().as_secs_f64() * 1e3).unwrap_or(0.0);

    let total_ms = t_start
        .map(|t| t.elapsed().as_secs_f64() * 1e3)
        .unwrap_or(0.0);
    Ok(TrialRecord {
        trial_index,
        hypothesis,
        su_decisions,
        retained,
        all_discarded: false,
        cluster_decisions,
        global,
        timings: timing.then_some(StageTimings {
            acquire_ms,
            recover_ms,
            detect_ms,
            fuse_ms,
            total_ms,
        }),
    })
}

type ClusterDecisions = Option<Vec<(ClusterId, Decision)>>;

fn fuse_trial(
    s: &Scenario,
    ctx: &PointContext,
    su_decisions: &[LocalDecision],
) -> Result<(ClusterDecisions, GlobalDecision)> {
    let rule: FusionRule = s.fusion_rule;
    match s.head_forwards {
        HeadForwards::Measurements => {
            // Heads relay data; the fusion center sees every retained SU.
            let values: Vec<Decision> = su_decisions.iter().map(|d| d.value).collect();
            let value = fuse_values(&values, rule)?;
            Ok((
                None,
                GlobalDecision {
                    value,
                    contributing: values,
                    rule_used: rule,
                },
            ))
        }
        HeadForwards::Decisions => {
            let mut cluster_decisions: Vec<(ClusterId, Decision)> = Vec::new();
            for cluster in ctx.topology.clusters() {
                let votes: Vec<Decision> = su_decisions
                    .iter()
                    .filter(|d| cluster.members.contains(&d.su_id))
                    .map(|d| d.value)
                    .collect();
                if !votes.is_empty() {
                    cluster_decisions.push((cluster.id, fuse_values(&votes, rule)?));
                }
            }
            let values: Vec<Decision> = cluster_decisions.iter().map(|(_, d)| *d).collect();
            let value = fuse_values(&values, rule)?;
            Ok((
                Some(cluster_decisions),
                GlobalDecision {
                    value,
                    contributing: values,
                    rule_used: rule,
                },
            ))
        }
    }
}
