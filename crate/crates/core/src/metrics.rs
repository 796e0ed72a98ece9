//! Trial counting, rate estimation and stage timing.

use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::error::{Error, Result};

/// Raw outcome counts of a batch of trials. Merging is plain summation, so
/// concurrent workers can accumulate independently and combine in any order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialCounts {
    pub n_h1_trials: u64,
    pub n_h0_trials: u64,
    pub n_detect_given_h1: u64,
    pub n_alarm_given_h0: u64,
    pub n_miss_given_h1: u64,
}

impl TrialCounts {
    pub fn zero() -> Self {
        TrialCounts::default()
    }

    pub fn record_h1(&mut self, detected: bool) {
        self.n_h1_trials += 1;
        if detected {
            self.n_detect_given_h1 += 1;
        } else {
            self.n_miss_given_h1 += 1;
        }
    }

    pub fn record_h0(&mut self, alarmed: bool) {
        self.n_h0_trials += 1;
        if alarmed {
            self.n_alarm_given_h0 += 1;
        }
    }

    pub fn merge(mut self, other: TrialCounts) -> TrialCounts {
        self.n_h1_trials += other.n_h1_trials;
        self.n_h0_trials += other.n_h0_trials;
        self.n_detect_given_h1 += other.n_detect_given_h1;
        self.n_alarm_given_h0 += other.n_alarm_given_h0;
        self.n_miss_given_h1 += other.n_miss_given_h1;
        self
    }
}

/// Detection/false-alarm/miss/error rates with binomial standard errors.
///
/// `pe` is the raw sum of false-alarm and miss rates and may exceed 1; the
/// averaged companion is emitted alongside it in results tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimates {
    pub pd: f64,
    pub pfa: f64,
    pub pmd: f64,
    pub pe: f64,
    pub pd_halfwidth: f64,
    pub pfa_halfwidth: f64,
    pub pmd_halfwidth: f64,
}

fn halfwidth(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Turns counts into rates. `pmd` is computed as `1 - pd` so the pair sums
/// to one exactly.
pub fn empirical_rates(counts: &TrialCounts) -> Result<RateEstimates> {
    if counts.n_detect_given_h1 + counts.n_miss_given_h1 != counts.n_h1_trials {
        return Err(Error::invalid("H1 outcome counts do not sum to the trial count"));
    }
    if counts.n_alarm_given_h0 > counts.n_h0_trials {
        return Err(Error::invalid("more alarms than H0 trials"));
    }
    if counts.n_h1_trials == 0 || counts.n_h0_trials == 0 {
        return Err(Error::invalid(
            "rates need at least one trial under each hypothesis",
        ));
    }
    let pd = counts.n_detect_given_h1 as f64 / counts.n_h1_trials as f64;
    let pfa = counts.n_alarm_given_h0 as f64 / counts.n_h0_trials as f64;
    let pmd = 1.0 - pd;
    Ok(RateEstimates {
        pd,
        pfa,
        pmd,
        pe: pfa + pmd,
        pd_halfwidth: halfwidth(pd, counts.n_h1_trials),
        pfa_halfwidth: halfwidth(pfa, counts.n_h0_trials),
        pmd_halfwidth: halfwidth(pmd, counts.n_h1_trials),
    })
}

/// Raw error probability: the uncapped sum of the two error rates.
pub fn error_probability(pfa: f64, pmd: f64) -> Result<f64> {
    for (name, p) in [("pfa", pfa), ("pmd", pmd)] {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::invalid(format!("{name} must lie in [0, 1], got {p}")));
        }
    }
    Ok(pfa + pmd)
}

/// Pipeline stages that get timed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Acquire,
    Recover,
    Detect,
    Fuse,
    Total,
}

/// Median wall time of a stage over repeated runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub wall_time_ms: f64,
    /// Number of timed repetitions behind the median (warm-up excluded).
    pub samples: usize,
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Times `work` with a monotonic clock: one unrecorded warm-up run, then
/// `repetitions` measured runs reduced to their median. Also returns the raw
/// per-repetition times.
pub fn time_stage_samples(
    stage: Stage,
    mut work: impl FnMut(),
    repetitions: usize,
) -> (StageTiming, Vec<f64>) {
    assert!(repetitions >= 1, "need at least one repetition");
    work(); // warm-up, excluded from the median
    let mut times = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        work();
        times.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let mut sorted = times.clone();
    let wall_time_ms = median(&mut sorted);
    (
        StageTiming {
            stage,
            wall_time_ms,
            samples: repetitions,
        },
        times,
    )
}

/// Median-of-repetitions stage timer.
pub fn time_stage(stage: Stage, work: impl FnMut(), repetitions: usize) -> StageTiming {
    time_stage_samples(stage, work, repetitions).0
}
