//! `specsense`: scenario runner, closed-form analytics and threshold
//! calibration for the cooperative compressive sensing simulator.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use specsense_core::{
    build_point_context, cluster_coop_prob, coop_pd, coop_pfa, emit_results, global_coop_prob,
    run_sweep, OutputFormat, QuadratureSettings, ResultsRow, Scenario, SweepGrid,
    ThresholdProvenance,
};

#[derive(Parser)]
#[command(
    name = "specsense",
    about = "Cluster-based cooperative spectrum sensing with compressive acquisition",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured Monte Carlo sweep and write a results table.
    Run(RunArgs),
    /// Evaluate the closed-form cooperative detection formulas.
    Analytic(AnalyticArgs),
    /// Calibrate the detection threshold for a scenario and print it.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config (JSON mirroring the scenario fields).
    #[arg(long)]
    config: PathBuf,
    /// Output path; defaults to results.csv / results.json by format.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Override the scenario's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override trials per hypothesis per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Override any scenario knob, e.g. --set snr_db=-5 or
    /// --set sweep.l_total=[5,10]. Values parse as JSON.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct AnalyticArgs {
    /// Per-SU detection probability.
    #[arg(long)]
    pd: Option<f64>,
    /// Per-SU false-alarm probability.
    #[arg(long)]
    pfa: Option<f64>,
    /// Number of cooperating SUs for the OR-rule closed forms.
    #[arg(long)]
    l: Option<u32>,
    /// Average SNR of the fading channels (enables the cluster integrals).
    #[arg(long)]
    gamma_bar: Option<f64>,
    /// Comma-separated cluster sizes, e.g. 2,2,2.
    #[arg(long)]
    cluster_sizes: Option<String>,
    /// Probability curve integrated against the best-member SNR density:
    /// `constant` holds --pd/--pfa flat, `ramp` uses 1 - exp(-snr/gamma_bar).
    #[arg(long, value_enum, default_value_t = Curve::Constant)]
    curve: Curve,
}

#[derive(Clone, Copy, ValueEnum)]
enum Curve {
    Constant,
    Ramp,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Scenario config (JSON mirroring the scenario fields).
    #[arg(long)]
    config: PathBuf,
    /// Override the calibration false-alarm target.
    #[arg(long)]
    target_pfa: Option<f64>,
    /// Override the number of calibration trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the scenario's base seed.
    #[arg(long)]
    seed: Option<u64>,
}

/// Usage-class failure: bad flags, unreadable or invalid config. Exit 2.
struct UsageError(String);

fn main() -> ExitCode {
    let cli = Cli::parse(); // clap exits 2 on unknown flags by itself
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Analytic(args) => cmd_analytic(args),
        Command::Calibrate(args) => cmd_calibrate(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Ok(UsageError(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Err(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

/// Errors split into usage problems (exit 2) and runtime failures (exit 1).
type CommandResult = Result<(), Result<UsageError, String>>;

fn usage<T>(msg: impl Into<String>) -> Result<T, Result<UsageError, String>> {
    Err(Ok(UsageError(msg.into())))
}

fn runtime<T>(msg: impl std::fmt::Display) -> Result<T, Result<UsageError, String>> {
    Err(Err(msg.to_string()))
}

fn load_scenario(
    path: &Path,
    seed: Option<u64>,
    trials: Option<usize>,
    overrides: &[String],
) -> Result<Scenario, Result<UsageError, String>> {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) => return usage(format!("cannot read config {}: {e}", path.display())),
    };
    let mut value: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => return usage(format!("config {} is not valid JSON: {e}", path.display())),
    };
    for item in overrides {
        let Some((key, raw)) = item.split_once('=') else {
            return usage(format!("--set expects KEY=VALUE, got {item:?}"));
        };
        let parsed: serde_json::Value = serde_json::from_str(raw)
            .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        let parts: Vec<&str> = key.split('.').collect();
        if let Err(e) = apply_override(&mut value, &parts, parsed) {
            return usage(format!("--set key {key:?}: {e}"));
        }
    }
    let mut scenario: Scenario = match serde_json::from_value(value) {
        Ok(s) => s,
        Err(e) => return usage(format!("config {} is invalid: {e}", path.display())),
    };
    if let Some(seed) = seed {
        scenario.base_seed = seed;
    }
    if let Some(trials) = trials {
        scenario.trials = trials;
    }
    if let Err(e) = scenario.validate() {
        return usage(format!("config {}: {e}", path.display()));
    }
    Ok(scenario)
}

fn apply_override(
    node: &mut serde_json::Value,
    parts: &[&str],
    parsed: serde_json::Value,
) -> Result<(), String> {
    let Some(map) = node.as_object_mut() else {
        return Err("path does not address an object".into());
    };
    match parts {
        [] => Err("empty key".into()),
        [last] => {
            map.insert((*last).to_string(), parsed);
            Ok(())
        }
        [head, rest @ ..] => {
            let child = map
                .entry((*head).to_string())
                .or_insert_with(|| serde_json::Value::Object(Default::default()));
            apply_override(child, rest, parsed)
        }
    }
}

fn cmd_run(args: RunArgs) -> CommandResult {
    let scenario = load_scenario(&args.config, args.seed, args.trials, &args.set)?;
    let grid = match SweepGrid::resolve(&scenario) {
        Ok(grid) => grid,
        Err(e) => return usage(format!("config {}: {e}", args.config.display())),
    };
    let n_points = grid.points().len();
    eprintln!(
        "running {n_points} sweep point(s), {} trials per hypothesis per point",
        scenario.trials
    );
    let table = match run_sweep(&scenario, &grid) {
        Ok(table) => table,
        Err(e) => return runtime(e),
    };
    let (format, extension) = match args.format {
        Format::Csv => (OutputFormat::Csv, "csv"),
        Format::Json => (OutputFormat::Json, "json"),
    };
    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("results.{extension}")));
    if let Err(e) = emit_results(&table, format, &out) {
        return runtime(e);
    }
    print_summary(&table.rows);
    eprintln!("wrote {} row(s) to {}", table.rows.len(), out.display());
    Ok(())
}

fn print_summary(rows: &[ResultsRow]) {
    println!("snr_db  n_sus  ratio   pd      pfa     pe_raw  t_total_ms");
    for row in rows {
        println!(
            "{:>6}  {:>5}  {:<6.3} {:<7.4} {:<7.4} {:<7.4} {:<10.3}",
            row.snr_db, row.n_sus, row.compression_ratio, row.pd, row.pfa, row.pe_raw,
            row.t_total_ms
        );
    }
}

fn cmd_analytic(args: AnalyticArgs) -> CommandResult {
    let mut printed = false;
    if let Some(l) = args.l {
        if let Some(pd) = args.pd {
            match coop_pd(pd, l) {
                Ok(cd) => println!("cooperative_pd(pd={pd}, l={l}) = {cd}"),
                Err(e) => return usage(e.to_string()),
            }
            printed = true;
        }
        if let Some(pfa) = args.pfa {
            match coop_pfa(pfa, l) {
                Ok(cfa) => println!("cooperative_pfa(pfa={pfa}, l={l}) = {cfa}"),
                Err(e) => return usage(e.to_string()),
            }
            printed = true;
        }
    }
    if let Some(sizes) = &args.cluster_sizes {
        let Some(gamma_bar) = args.gamma_bar else {
            return usage("--cluster-sizes requires --gamma-bar");
        };
        let sizes: Vec<u32> = match sizes.split(',').map(|s| s.trim().parse()).collect() {
            Ok(sizes) => sizes,
            Err(e) => return usage(format!("--cluster-sizes must be integers: {e}")),
        };
        let quad = QuadratureSettings::default();
        let curve_for = |level: f64| {
            let curve = args.curve;
            move |gamma: f64| match curve {
                Curve::Constant => level,
                Curve::Ramp => 1.0 - (-gamma / gamma_bar).exp(),
            }
        };
        let pd_level = match args.curve {
            Curve::Constant => match args.pd {
                Some(pd) => pd,
                None => return usage("--curve constant requires --pd"),
            },
            Curve::Ramp => 0.0,
        };
        println!("cluster  n_k  q_d{}", if args.pfa.is_some() { "        q_fa" } else { "" });
        let mut per_cluster_pd = Vec::new();
        let mut per_cluster_pfa = Vec::new();
        for (idx, &n_k) in sizes.iter().enumerate() {
            let qd = match cluster_coop_prob(curve_for(pd_level), gamma_bar, n_k, &quad) {
                Ok(q) => q,
                Err(e) => return usage(e.to_string()),
            };
            per_cluster_pd.push(qd);
            match args.pfa {
                Some(pfa) => {
                    // false alarms do not depend on the received SNR; the
                    // constant level integrates against the same density
                    let qfa = match cluster_coop_prob(|_| pfa, gamma_bar, n_k, &quad) {
                        Ok(q) => q,
                        Err(e) => return usage(e.to_string()),
                    };
                    per_cluster_pfa.push(qfa);
                    println!("{idx:>7}  {n_k:>3}  {qd:<9.6} {qfa:<9.6}");
                }
                None => println!("{idx:>7}  {n_k:>3}  {qd:<9.6}"),
            }
        }
        match global_coop_prob(&per_cluster_pd) {
            Ok(qd) => println!("global_q_d = {qd}"),
            Err(e) => return usage(e.to_string()),
        }
        if !per_cluster_pfa.is_empty() {
            match global_coop_prob(&per_cluster_pfa) {
                Ok(qfa) => println!("global_q_fa = {qfa}"),
                Err(e) => return usage(e.to_string()),
            }
        }
        printed = true;
    }
    if !printed {
        return usage(
            "nothing to evaluate: pass --pd/--pfa with --l, or --gamma-bar with --cluster-sizes",
        );
    }
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> CommandResult {
    let mut scenario = load_scenario(&args.config, args.seed, None, &[])?;
    scenario.manual_threshold = None;
    if let Some(target) = args.target_pfa {
        scenario.target_pfa = target;
    }
    if let Some(trials) = args.trials {
        scenario.calibration_trials = trials;
    }
    if let Err(e) = scenario.validate() {
        return usage(format!("config {}: {e}", args.config.display()));
    }
    let ctx = match build_point_context(&scenario) {
        Ok(ctx) => ctx,
        Err(e) => return runtime(e),
    };
    let threshold = ctx.threshold;
    println!("threshold = {}", threshold.value);
    match threshold.calibration {
        ThresholdProvenance::Calibrated { target_pfa, n_trials, seed } => {
            println!("  target_pfa = {target_pfa}");
            println!("  calibration_trials = {n_trials}");
            println!("  calibration_seed = {seed}");
        }
        ThresholdProvenance::Manual => println!("  provenance = manual"),
    }
    println!(
        "  n_samples = {}, measurements = {}, noise_variance = {:e}",
        scenario.n_samples,
        scenario.measurement_rows().map_err(|e| Err(e.to_string()))?,
        scenario.noise_variance()
    );
    Ok(())
}
