//! Scenario knobs, eager validation and the sweep-axis declarations.
//!
//! A scenario doubles as the on-disk config document: every field has a
//! default, so a JSON file only needs the knobs it changes. Unknown keys are
//! rejected to catch typos early.

use serde::{Deserialize, Serialize};

use crate::acquisition::MatrixKind;
use crate::error::{Error, Result};
use crate::fusion::{assign_clusters, ClusterSpec, FusionRule};
use crate::recovery::StopRule;
use crate::signal::FadingKind;

/// What cluster heads forward to the fusion center.
///
/// `Decisions` is the two-level flow: heads fuse their members' verdicts and
/// the center fuses the per-cluster verdicts. `Measurements` models heads
/// relaying raw data, so the center fuses all retained SUs' verdicts in one
/// flat vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadForwards {
    Decisions,
    Measurements,
}

/// One value of the compression axis: a measurement ratio, or the
/// no-compression baseline that feeds raw samples to the detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CompressionSetting {
    Ratio(f64),
    Keyword(CompressionKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompressionKeyword {
    Bypass,
}

impl CompressionSetting {
    pub const BYPASS: CompressionSetting =
        CompressionSetting::Keyword(CompressionKeyword::Bypass);

    pub fn is_bypass(&self) -> bool {
        matches!(self, CompressionSetting::Keyword(CompressionKeyword::Bypass))
    }
}

/// Optional per-axis value lists for sweeps; a missing axis stays at the
/// scenario's single value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(default)]
    pub snr_db: Option<Vec<f64>>,
    #[serde(default)]
    pub l_total: Option<Vec<usize>>,
    #[serde(default)]
    pub compression_ratio: Option<Vec<CompressionSetting>>,
}

fn default_n_samples() -> usize {
    1000
}
fn default_snr_db() -> f64 {
    0.0
}
fn default_fading() -> FadingKind {
    FadingKind::Rayleigh
}
fn default_l_total() -> usize {
    10
}
fn default_clusters() -> ClusterSpec {
    ClusterSpec::EqualSplit(1)
}
fn default_matrix_kind() -> MatrixKind {
    MatrixKind::AicPm1
}
fn default_matrix_seed() -> u64 {
    7
}
fn default_compression_ratio() -> Option<f64> {
    Some(0.5)
}
fn default_fusion_rule() -> FusionRule {
    FusionRule::Majority
}
fn default_head_forwards() -> HeadForwards {
    HeadForwards::Decisions
}
fn default_target_pfa() -> f64 {
    0.1
}
fn default_calibration_trials() -> usize {
    2000
}
fn default_residual_tol() -> f64 {
    1e-6
}
fn default_reference_power() -> f64 {
    1.0
}
fn default_trials() -> usize {
    1000
}
fn default_base_seed() -> u64 {
    1
}
fn default_measure_timing() -> bool {
    true
}

/// Every knob of one simulated deployment. `trials` counts trials per
/// hypothesis: each sweep point runs that many occupied and that many free
/// channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    /// Occupied frequency bins of the transmitter signal; defaults to 5% of
    /// `n_samples` (at least one).
    #[serde(default)]
    pub sparsity: Option<usize>,
    #[serde(default = "default_snr_db")]
    pub snr_db: f64,
    #[serde(default = "default_fading")]
    pub fading: FadingKind,
    #[serde(default = "default_l_total")]
    pub l_total: usize,
    /// Cluster count for an equal split, or explicit member lists.
    #[serde(default = "default_clusters")]
    pub clusters: ClusterSpec,
    #[serde(default = "default_matrix_kind")]
    pub matrix_kind: MatrixKind,
    #[serde(default = "default_matrix_seed")]
    pub matrix_seed: u64,
    /// Give each SU its own matrix seed instead of one shared matrix.
    #[serde(default)]
    pub per_su_matrix_seeds: bool,
    /// M/N in (0, 1]; must be null when `bypass_compression` is set.
    #[serde(default = "default_compression_ratio")]
    pub compression_ratio: Option<f64>,
    /// Baseline without compression: the detector consumes raw N-sample
    /// streams through an identity acquisition.
    #[serde(default)]
    pub bypass_compression: bool,
    #[serde(default)]
    pub compression_noise_variance: f64,
    /// Minimum received power to stay in a cluster; 0 retains every SU.
    #[serde(default)]
    pub discard_delta: f64,
    #[serde(default = "default_fusion_rule")]
    pub fusion_rule: FusionRule,
    #[serde(default = "default_head_forwards")]
    pub head_forwards: HeadForwards,
    #[serde(default = "default_target_pfa")]
    pub target_pfa: f64,
    #[serde(default = "default_calibration_trials")]
    pub calibration_trials: usize,
    /// Fixed detection threshold; skips calibration when set.
    #[serde(default)]
    pub manual_threshold: Option<f64>,
    /// Recovery support cap; defaults to the signal sparsity.
    #[serde(default)]
    pub max_sparsity: Option<usize>,
    /// Relative residual floor of the recovery stopping rule.
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    /// Noise reference when the scenario's signal has zero power (k = 0).
    #[serde(default = "default_reference_power")]
    pub reference_power: f64,
    /// Trials per hypothesis per sweep point.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_base_seed")]
    pub base_seed: u64,
    /// Record wall-clock stage timings. Disable for byte-reproducible
    /// results files; timing columns are then zero.
    #[serde(default = "default_measure_timing")]
    pub measure_timing: bool,
    /// Worker threads (0 or null = auto, overridable via SPECSENSE_THREADS).
    #[serde(default)]
    pub threads: Option<usize>,
    /// Optional sweep axes; ignored by single-trial runs.
    #[serde(default)]
    pub sweep: Option<SweepAxes>,
}

impl Default for Scenario {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults are complete")
    }
}

impl Scenario {
    pub fn resolved_sparsity(&self) -> usize {
        self.sparsity
            .unwrap_or_else(|| ((self.n_samples as f64 * 0.05).round() as usize).max(1))
    }

    pub fn resolved_max_sparsity(&self) -> usize {
        self.max_sparsity.unwrap_or_else(|| self.resolved_sparsity())
    }

    pub fn stop_rule(&self) -> StopRule {
        StopRule {
            max_sparsity: self.resolved_max_sparsity(),
            relative_residual_tol: self.residual_tol,
        }
    }

    /// Measurement count M for this scenario.
    pub fn measurement_rows(&self) -> Result<usize> {
        if self.bypass_compression {
            return Ok(self.n_samples);
        }
        let ratio = self
            .compression_ratio
            .ok_or_else(|| Error::invalid("compression_ratio required unless bypassing"))?;
        Ok(((self.n_samples as f64 * ratio).round() as usize).clamp(1, self.n_samples))
    }

    /// Mean power of the scenario's transmitter signal. Unit-magnitude
    /// coefficients make this exactly k/N^2 independent of the draw.
    pub fn signal_power(&self) -> f64 {
        let k = self.resolved_sparsity();
        if k == 0 {
            self.reference_power
        } else {
            k as f64 / (self.n_samples as f64 * self.n_samples as f64)
        }
    }

    /// Noise variance per complex sample implied by the SNR target.
    pub fn noise_variance(&self) -> f64 {
        self.signal_power() / 10f64.powf(self.snr_db / 10.0)
    }

    /// Clone with one sweep point's axis values substituted.
    pub fn at_point(&self, snr_db: f64, l_total: usize, compression: CompressionSetting) -> Scenario {
        let mut s = self.clone();
        s.snr_db = snr_db;
        s.l_total = l_total;
        match compression {
            CompressionSetting::Ratio(r) => {
                s.compression_ratio = Some(r);
                s.bypass_compression = false;
            }
            CompressionSetting::Keyword(CompressionKeyword::Bypass) => {
                s.compression_ratio = None;
                s.bypass_compression = true;
            }
        }
        s
    }

    pub fn compression_setting(&self) -> CompressionSetting {
        if self.bypass_compression {
            CompressionSetting::BYPASS
        } else {
            CompressionSetting::Ratio(self.compression_ratio.unwrap_or(1.0))
        }
    }

    /// Checks every module precondition this scenario will hit.
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples must be at least 1"));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::invalid("snr_db must be finite"));
        }
        let k = self.resolved_sparsity();
        if k > self.n_samples {
            return Err(Error::invalid(format!(
                "sparsity {k} exceeds n_samples {}",
                self.n_samples
            )));
        }
        if self.l_total == 0 {
            return Err(Error::invalid("l_total must be at least 1"));
        }
        assign_clusters(self.l_total, &self.clusters)?;
        if self.bypass_compression && self.compression_ratio.is_some() {
            return Err(Error::invalid(
                "bypass_compression and compression_ratio are mutually exclusive; \
                 set compression_ratio to null when bypassing",
            ));
        }
        if !self.bypass_compression {
            let ratio = self
                .compression_ratio
                .ok_or_else(|| Error::invalid("compression_ratio required unless bypassing"))?;
            if !(ratio > 0.0 && ratio <= 1.0) {
                return Err(Error::invalid(format!(
                    "compression_ratio must lie in (0, 1], got {ratio}"
                )));
            }
        }
        let m = self.measurement_rows()?;
        if self.resolved_max_sparsity() > m {
            return Err(Error::invalid(format!(
                "recovery stopping sparsity {} exceeds measurement count {m}",
                self.resolved_max_sparsity()
            )));
        }
        if self.resolved_max_sparsity() == 0 {
            return Err(Error::invalid("recovery stopping sparsity must be at least 1"));
        }
        if self.compression_noise_variance < 0.0 || !self.compression_noise_variance.is_finite()
        {
            return Err(Error::invalid("compression_noise_variance must be finite and >= 0"));
        }
        if self.discard_delta < 0.0 || !self.discard_delta.is_finite() {
            return Err(Error::invalid("discard_delta must be finite and >= 0"));
        }
        match self.manual_threshold {
            Some(t) => {
                if !t.is_finite() || t < 0.0 {
                    return Err(Error::invalid("manual_threshold must be finite and >= 0"));
                }
            }
            None => {
                if !(self.target_pfa > 0.0 && self.target_pfa < 1.0) {
                    return Err(Error::invalid("target_pfa must lie strictly between 0 and 1"));
                }
                if self.calibration_trials < 100 {
                    return Err(Error::invalid("calibration needs at least 100 trials"));
                }
            }
        }
        if self.residual_tol < 0.0 || !self.residual_tol.is_finite() {
            return Err(Error::invalid("residual_tol must be finite and >= 0"));
        }
        if self.reference_power <= 0.0 || !self.reference_power.is_finite() {
            return Err(Error::invalid("reference_power must be positive and finite"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        Ok(())
    }
}
