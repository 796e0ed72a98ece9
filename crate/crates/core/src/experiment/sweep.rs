//! Sweep orchestration: the Cartesian grid of scenario axes, deterministic
//! parallel execution, and per-point rate/timing aggregation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::scenario::{CompressionSetting, Scenario};
use crate::experiment::trial::{build_point_context, run_trial_in_context, TrialRecord};
use crate::metrics::{empirical_rates, median, TrialCounts};
use crate::recovery::Decision;
use crate::signal::Hypothesis;

/// Cartesian sweep axes. Rows are emitted with SNR outermost and the
/// compression setting innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub snr_db: Vec<f64>,
    pub l_total: Vec<usize>,
    pub compression: Vec<CompressionSetting>,
}

impl SweepGrid {
    /// Axes from the scenario's optional sweep block; missing axes stay at
    /// the scenario's single value.
    pub fn resolve(scenario: &Scenario) -> Result<Self> {
        let axes = scenario.sweep.clone().unwrap_or_default();
        let grid = SweepGrid {
            snr_db: axes.snr_db.unwrap_or_else(|| vec![scenario.snr_db]),
            l_total: axes.l_total.unwrap_or_else(|| vec![scenario.l_total]),
            compression: axes
                .compression_ratio
                .unwrap_or_else(|| vec![scenario.compression_setting()]),
        };
        grid.check_axes()?;
        Ok(grid)
    }

    fn check_axes(&self) -> Result<()> {
        if self.snr_db.is_empty() {
            return Err(Error::invalid("empty snr_db axis"));
        }
        if self.l_total.is_empty() {
            return Err(Error::invalid("empty l_total axis"));
        }
        if self.compression.is_empty() {
            return Err(Error::invalid("empty compression axis"));
        }
        Ok(())
    }

    /// Points in deterministic emission order.
    pub fn points(&self) -> Vec<(f64, usize, CompressionSetting)> {
        let mut points = Vec::with_capacity(self.snr_db.len() * self.l_total.len() * self.compression.len());
        for &snr in &self.snr_db {
            for &l in &self.l_total {
                for &c in &self.compression {
                    points.push((snr, l, c));
                }
            }
        }
        points
    }
}

/// One sweep point's aggregated results. Field order matches the CSV header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsRow {
    pub snr_db: f64,
    pub n_sus: usize,
    pub n_clusters: usize,
    /// Actual M/N of the point (1 for the no-compression baseline).
    pub compression_ratio: f64,
    pub pd: f64,
    pub pfa: f64,
    pub pmd: f64,
    /// Raw sum of the error rates; may exceed 1.
    pub pe_raw: f64,
    /// Averaged companion, (pfa + pmd) / 2; always within [0, 1].
    pub pe_avg: f64,
    pub t_acquire_ms: f64,
    pub t_recover_ms: f64,
    pub t_detect_ms: f64,
    pub t_fuse_ms: f64,
    pub t_total_ms: f64,
    /// Total trials behind the row (both hypotheses).
    pub n_trials: u64,
    pub base_seed: u64,
}

/// Rows of a finished sweep, in deterministic grid order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub rows: Vec<ResultsRow>,
}

fn resolve_threads(scenario: &Scenario) -> Result<usize> {
    let configured = match scenario.threads {
        Some(t) => Some(t),
        None => match std::env::var("SPECSENSE_THREADS") {
            Ok(text) => Some(text.trim().parse::<usize>().map_err(|_| {
                Error::invalid(format!("SPECSENSE_THREADS must be an integer, got {text:?}"))
            })?),
            Err(_) => None,
        },
    };
    Ok(match configured {
        Some(0) | None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        Some(t) => t,
    })
}

fn stage_medians(records: &[TrialRecord]) -> [f64; 5] {
    let mut columns: [Vec<f64>; 5] = Default::default();
    for record in records {
        if let Some(t) = record.timings {
            columns[0].push(t.acquire_ms);
            columns[1].push(t.recover_ms);
            columns[2].push(t.detect_ms);
            columns[3].push(t.fuse_ms);
            columns[4].push(t.total_ms);
        }
    }
    let mut out = [0.0; 5];
    for (o, column) in out.iter_mut().zip(columns.iter_mut()) {
        *o = median(column);
    }
    out
}

/// Runs every grid point: `trials` occupied and `trials` free channels per
/// point. Trials execute in parallel on a dedicated pool; per-trial seeding
/// and commutative count merging make the output independent of the worker
/// count.
pub fn run_sweep(scenario: &Scenario, grid: &SweepGrid) -> Result<ResultsTable> {
    scenario.validate()?;
    grid.check_axes()?;
    let points = grid.points();
    // Fail fast: every point must be valid before any point runs.
    let scenarios: Vec<Scenario> = points
        .iter()
        .map(|&(snr, l, c)| {
            let s = scenario.at_point(snr, l, c);
            s.validate().map_err(|e| {
                e.in_context(format!("sweep point snr_db={snr}, l_total={l}, compression={c:?}"))
            })?;
            Ok(s)
        })
        .collect::<Result<_>>()?;

    let threads = resolve_threads(scenario)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot build worker pool: {e}")))?;

    let mut rows = Vec::with_capacity(scenarios.len());
    for point_scenario in &scenarios {
        let describe = || {
            format!(
                "sweep point snr_db={}, l_total={}, m={}",
                point_scenario.snr_db,
                point_scenario.l_total,
                point_scenario.measurement_rows().unwrap_or(0)
            )
        };
        let ctx = pool
            .install(|| build_point_context(point_scenario))
            .map_err(|e| e.in_context(describe()))?;
        let records: Vec<(TrialRecord, TrialRecord)> = pool
            .install(|| {
                (0..point_scenario.trials as u64)
                    .into_par_iter()
                    .map(|t| {
                        let h1 = run_trial_in_context(&ctx, t, Hypothesis::Present)
                            .map_err(|e| e.in_context(format!("trial {t} under H1")))?;
                        let h0 = run_trial_in_context(&ctx, t, Hypothesis::Absent)
                            .map_err(|e| e.in_context(format!("trial {t} under H0")))?;
                        Ok((h1, h0))
                    })
                    .collect::<Result<_>>()
            })
            .map_err(|e| e.in_context(describe()))?;

        let counts = records
            .iter()
            .fold(TrialCounts::zero(), |mut acc, (h1, h0)| {
                acc.record_h1(h1.global.value == Decision::Occupied);
                acc.record_h0(h0.global.value == Decision::Occupied);
                acc
            });
        let rates = empirical_rates(&counts).map_err(|e| e.in_context(describe()))?;
        let all_records: Vec<TrialRecord> = records
            .into_iter()
            .flat_map(|(h1, h0)| [h1, h0])
            .collect();
        let [t_acquire_ms, t_recover_ms, t_detect_ms, t_fuse_ms, t_total_ms] =
            stage_medians(&all_records);

        let m = point_scenario.measurement_rows()?;
        rows.push(ResultsRow {
            snr_db: point_scenario.snr_db,
            n_sus: point_scenario.l_total,
            n_clusters: ctx.topology.n_clusters(),
            compression_ratio: m as f64 / point_scenario.n_samples as f64,
            pd: rates.pd,
            pfa: rates.pfa,
            pmd: rates.pmd,
            pe_raw: rates.pe,
            pe_avg: 0.5 * (rates.pfa + rates.pmd),
            t_acquire_ms,
            t_recover_ms,
            t_detect_ms,
            t_fuse_ms,
            t_total_ms,
            n_trials: 2 * point_scenario.trials as u64,
            base_seed: scenario.base_seed,
        });
    }
    Ok(ResultsTable { rows })
}
