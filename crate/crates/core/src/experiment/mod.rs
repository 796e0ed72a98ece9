//! Scenario configuration, the per-trial pipeline, Monte Carlo sweeps and
//! results emission.

mod emit;
mod scenario;
mod sweep;
mod trial;

pub use emit::{emit_results, render_csv, render_json, OutputFormat, RESULTS_CSV_HEADER};
pub use scenario::{CompressionSetting, HeadForwards, Scenario, SweepAxes};
pub use sweep::{run_sweep, ResultsRow, ResultsTable, SweepGrid};
pub use trial::{
    build_point_context, run_trial, run_trial_in_context, PointContext, StageTimings, TrialRecord,
};
