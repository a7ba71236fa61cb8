//! Command-line wiring: `train`, `validate`, `recommend`, `simulate-mrp`
//! and `sensitivity`.
//!
//! Logs go to standard error; data goes to files under the output
//! directory. Every command is idempotent given (inputs, seed): re-running
//! overwrites byte-identical files. Per-SKU failures are isolated — one bad
//! SKU never aborts the fleet run; failures land in `run_summary.json` and
//! flip the exit status.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::backtest::{
    aggregate_metrics, recommend_live, run_backtest, staircase, BacktestConfig, BacktestResult,
    SavingsTerms,
};
use crate::config::{parse_period, FileConfig, RunConfig, SkuSelection};
use crate::domain::{Day, DayRange, ReorderParams};
use crate::ingest::{load_fleet, SkuDataset};
use crate::mrp::{apply_safety_time, run_mrp, MrpInput};
use crate::optimizer::{write_kiter_trace, ForwardSimConfig};
use crate::trainer::{train, HyperGrid, TrainReport};
use crate::uncertainty::UswMode;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "invopt",
    about = "Simulation-based inventory optimization for safety-stock MRP",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grid-search hyper-parameters per SKU on the training period.
    Train(CommonArgs),
    /// Backtest the trained (or supplied) hyper-parameters on the
    /// validation period and score against actuals.
    Validate(ValidateArgs),
    /// Recommend reorder parameters at "today" (live mode).
    Recommend(RecommendArgs),
    /// Run one deterministic MRP pass from flags and a CSV input.
    SimulateMrp(SimulateMrpArgs),
    /// Sweep one model parameter and report the fleet metrics per value.
    Sensitivity(SensitivityArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct CommonArgs {
    /// TOML configuration file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory with the input CSV files.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory for reports.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Global random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated SKU list, or "all".
    #[arg(long)]
    pub skus: Option<String>,
    /// Fleet parallelism bound (0 = one worker per core).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub training_start: Option<String>,
    #[arg(long)]
    pub training_end: Option<String>,
    #[arg(long)]
    pub validation_start: Option<String>,
    #[arg(long)]
    pub validation_end: Option<String>,
    #[arg(long)]
    pub operation_date: Option<String>,
    /// SLP candidates (fractions), comma-separated.
    #[arg(long)]
    pub slp_candidates: Option<String>,
    /// STP candidates (fractions), comma-separated.
    #[arg(long)]
    pub stp_candidates: Option<String>,
    #[arg(long)]
    pub n_c: Option<f64>,
    #[arg(long)]
    pub n_u: Option<f64>,
    #[arg(long)]
    pub b_usw: Option<i64>,
    #[arg(long)]
    pub l_min_usw: Option<i64>,
    #[arg(long)]
    pub n_realizations: Option<u32>,
    #[arg(long)]
    pub n_os: Option<u32>,
    #[arg(long)]
    pub frequency: Option<i64>,
    #[arg(long)]
    pub max_iterations: Option<u32>,
    #[arg(long)]
    pub aggregation_percentile: Option<f64>,
    /// Dump `uncertainties_<sku>_<date>.csv` sample files.
    #[arg(long)]
    pub dump_uncertainties: bool,
    /// Dump `kiter_<sku>_<date>.csv` lifting traces.
    #[arg(long)]
    pub dump_kiter: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bypass training: use this service-level percentile directly.
    #[arg(long)]
    pub slp: Option<f64>,
    /// Bypass training: use this safety-time percentile directly.
    #[arg(long)]
    pub stp: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Recommendation date (defaults to the configured operation date).
    #[arg(long)]
    pub today: Option<String>,
    #[arg(long)]
    pub slp: Option<f64>,
    #[arg(long)]
    pub stp: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateMrpArgs {
    /// Input CSV with columns day,forecast,std_arrivals,exp_arrivals.
    #[arg(long)]
    pub input: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub x0: f64,
    #[arg(long)]
    pub ssv: f64,
    #[arg(long, default_value_t = 0)]
    pub st: i64,
    #[arg(long)]
    pub lead_time: i64,
    #[arg(long, default_value_t = 0)]
    pub expedited_lead_time: i64,
    #[arg(long, default_value_t = 0)]
    pub ptf: i64,
    #[arg(long, default_value_t = 0.0)]
    pub moq: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rounding_value: f64,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Swept parameter: n-c, n-u, slp-list, b-usw or n-r.
    #[arg(long)]
    pub axis: String,
    /// Comma-separated values; for slp-list, semicolon-separated lists of
    /// '|'-separated percentiles (e.g. "50|70|90;50|70|90|92.5|95").
    #[arg(long)]
    pub values: String,
    #[arg(long)]
    pub slp: Option<f64>,
    #[arg(long)]
    pub stp: Option<f64>,
}

/// Entry point used by the binary and by tests; returns the process exit
/// status.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Train(args) => cmd_train(&args),
        Command::Validate(args) => cmd_validate(&args),
        Command::Recommend(args) => cmd_recommend(&args),
        Command::SimulateMrp(args) => cmd_simulate_mrp(&args),
        Command::Sensitivity(args) => cmd_sensitivity(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            2
        }
    }
}

/// Resolve the layered configuration: defaults < config file < flags.
pub fn resolve_config(args: &CommonArgs) -> Result<RunConfig> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let data_root = args
        .data
        .clone()
        .or(file.run.data)
        .ok_or_else(|| Error::Config("no data directory (--data or [run].data)".into()))?;
    let output_dir = args
        .out
        .clone()
        .or(file.run.out)
        .ok_or_else(|| Error::Config("no output directory (--out or [run].out)".into()))?;

    let pick_date = |flag: &Option<String>, file_val: &Option<String>| -> Option<String> {
        flag.clone().or_else(|| file_val.clone())
    };
    let training = parse_period(
        "training",
        pick_date(&args.training_start, &file.periods.training_start).as_deref(),
        pick_date(&args.training_end, &file.periods.training_end).as_deref(),
    )?;
    let validation = parse_period(
        "validation",
        pick_date(&args.validation_start, &file.periods.validation_start).as_deref(),
        pick_date(&args.validation_end, &file.periods.validation_end).as_deref(),
    )?;
    let operation_date = pick_date(&args.operation_date, &file.periods.operation_date)
        .map(|s| Day::from_iso(&s))
        .transpose()?;

    let parse_list = |raw: &str, name: &str| -> Result<Vec<f64>> {
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("invalid {name} value {s:?}")))
            })
            .collect()
    };
    let slp = match &args.slp_candidates {
        Some(raw) => parse_list(raw, "slp")?,
        None => file.grid.slp.unwrap_or_else(|| HyperGrid::default_slp().slp_candidates),
    };
    let stp = match &args.stp_candidates {
        Some(raw) => parse_list(raw, "stp")?,
        None => file.grid.stp.unwrap_or_else(|| vec![0.0]),
    };

    let mut model = file.model;
    macro_rules! override_model {
        ($($field:ident),*) => {
            $(if let Some(v) = args.$field { model.$field = v; })*
        };
    }
    override_model!(
        n_c,
        n_u,
        b_usw,
        l_min_usw,
        n_realizations,
        n_os,
        frequency,
        max_iterations,
        aggregation_percentile
    );

    let cfg = RunConfig {
        data_root,
        output_dir,
        seed: args.seed.or(file.run.seed).unwrap_or(42),
        skus: SkuSelection::parse(
            args.skus
                .as_deref()
                .or(file.run.skus.as_deref())
                .unwrap_or("all"),
        ),
        training,
        validation,
        operation_date,
        grid: HyperGrid::new(slp, stp)?,
        model,
        jobs: args.jobs.or(file.run.jobs).unwrap_or(0),
        dump_uncertainties: args.dump_uncertainties
            || file.run.dump_uncertainties.unwrap_or(false),
        dump_kiter: args.dump_kiter || file.run.dump_kiter.unwrap_or(false),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn backtest_config(cfg: &RunConfig, period: DayRange, mode: UswMode) -> BacktestConfig {
    BacktestConfig {
        period,
        frequency: cfg.model.frequency,
        n_os: cfg.model.n_os,
        fwd: ForwardSimConfig {
            n_realizations: cfg.model.n_realizations,
            slp: 0.5,
            stp: 0.0,
            sl_min: 1.0, // overridden per SKU
            max_iterations: cfg.model.max_iterations,
            aggregation_percentile: cfg.model.aggregation_percentile,
        },
        usw_mode: mode,
        b_usw: cfg.model.b_usw,
        l_min_usw: cfg.model.l_min_usw,
        n_c: cfg.model.n_c,
        n_u: cfg.model.n_u,
        seed: cfg.seed,
    }
}

fn selected_fleet(cfg: &RunConfig) -> Result<BTreeMap<String, SkuDataset>> {
    let mut fleet = load_fleet(&cfg.data_root)?;
    fleet.retain(|sku, _| cfg.skus.includes(sku));
    if fleet.is_empty() {
        return Err(Error::Config(format!(
            "no SKUs selected from {}",
            cfg.data_root.display()
        )));
    }
    Ok(fleet)
}

fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(serde::Serialize)]
struct RunSummary {
    command: String,
    succeeded: Vec<String>,
    failed: BTreeMap<String, String>,
    skipped: BTreeMap<String, String>,
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    std::fs::write(path, body + "\n").map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    csv::Writer::from_path(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

// --- train ---------------------------------------------------------------------

fn cmd_train(args: &CommonArgs) -> Result<i32> {
    let cfg = resolve_config(args)?;
    let period = cfg.training_period()?;
    let fleet = selected_fleet(&cfg)?;
    let base = backtest_config(&cfg, period, UswMode::Training);

    let results: Vec<(String, Result<TrainReport>)> = with_jobs(cfg.jobs, || {
        fleet
            .par_iter()
            .map(|(sku, ds)| (sku.clone(), train(ds, &cfg.grid, &base, period)))
            .collect()
    })?;

    let mut summary = RunSummary {
        command: "train".into(),
        succeeded: vec![],
        failed: BTreeMap::new(),
        skipped: BTreeMap::new(),
    };
    for (sku, result) in results {
        match result {
            Ok(report) => {
                write_json(
                    &cfg.output_dir.join(format!("train_report_{sku}.json")),
                    &report,
                )?;
                summary.succeeded.push(sku);
            }
            Err(e) => {
                log::error!("training failed for {sku}: {e}");
                summary.failed.insert(sku, e.to_string());
            }
        }
    }
    let exit = if summary.failed.is_empty() { 0 } else { 1 };
    write_json(&cfg.output_dir.join("train_summary.json"), &summary)?;
    Ok(exit)
}

// --- validate ------------------------------------------------------------------

/// Hyper-parameters for one SKU: inline flags win, then the SKU's train
/// report from the output directory.
fn resolve_hypers(
    cfg: &RunConfig,
    sku: &str,
    inline: Option<(f64, f64)>,
) -> Result<(f64, f64)> {
    if let Some(pair) = inline {
        return Ok(pair);
    }
    let path = cfg.output_dir.join(format!("train_report_{sku}.json"));
    if !path.exists() {
        return Err(Error::Config(format!(
            "no hyper-parameters for {sku}: pass --slp/--stp or train first (expected {})",
            path.display()
        )));
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    let report: TrainReport = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok((report.chosen_slp, report.chosen_stp))
}

struct SkuValidation {
    result: BacktestResult,
    slp: f64,
    stp: f64,
}

fn validate_fleet(
    cfg: &RunConfig,
    fleet: &BTreeMap<String, SkuDataset>,
    period: DayRange,
    inline: Option<(f64, f64)>,
) -> Result<Vec<(String, Result<SkuValidation>)>> {
    let base = backtest_config(cfg, period, UswMode::Validation);
    with_jobs(cfg.jobs, || {
        fleet
            .par_iter()
            .map(|(sku, ds)| {
                let run = || -> Result<SkuValidation> {
                    let (slp, stp) = resolve_hypers(cfg, sku, inline)?;
                    let mut bt = base.clone();
                    bt.fwd.slp = slp;
                    bt.fwd.stp = stp;
                    let result = run_backtest(ds, &bt)?;
                    Ok(SkuValidation { result, slp, stp })
                };
                (sku.clone(), run())
            })
            .collect()
    })
}

#[derive(serde::Serialize)]
struct SkuMetricsOut {
    sl: f64,
    target_sl: f64,
    s_inv_bar: f64,
    s_ss_bar: f64,
    s_ss_op: f64,
    final_ssv: f64,
    final_st: i64,
    slp: f64,
    stp: f64,
    n_orders: u64,
    non_converged: u32,
}

#[derive(serde::Serialize)]
struct MetricsOut {
    r_ad: f64,
    s_inv_bar: f64,
    s_ss_bar: f64,
    s_ss_op: f64,
    per_sku: BTreeMap<String, SkuMetricsOut>,
}

fn write_validation_outputs(
    cfg: &RunConfig,
    fleet: &BTreeMap<String, SkuDataset>,
    period: DayRange,
    outcomes: &[(String, Result<SkuValidation>)],
) -> Result<RunSummary> {
    let mut summary = RunSummary {
        command: "validate".into(),
        succeeded: vec![],
        failed: BTreeMap::new(),
        skipped: BTreeMap::new(),
    };

    // recommendations.csv: one row per (sku, day), stair-stepped.
    let rec_path = cfg.output_dir.join("recommendations.csv");
    let mut rec = csv_writer(&rec_path)?;
    rec.write_record(["date", "sku", "ssv", "st"])
        .map_err(csv_err(&rec_path))?;

    let mut per_sku_terms: BTreeMap<String, (f64, f64, SavingsTerms)> = BTreeMap::new();
    let mut per_sku_out: BTreeMap<String, SkuMetricsOut> = BTreeMap::new();

    for (sku, outcome) in outcomes {
        let v = match outcome {
            Ok(v) => v,
            Err(e) => {
                log::error!("validation failed for {sku}: {e}");
                summary.failed.insert(sku.clone(), e.to_string());
                continue;
            }
        };
        let ds = &fleet[sku];
        let r = &v.result;
        for (day, params) in staircase(&r.recommendations, period) {
            rec.write_record([
                day.to_string(),
                sku.clone(),
                params.ssv.to_string(),
                params.st.to_string(),
            ])
            .map_err(csv_err(&rec_path))?;
        }

        // trajectory_<sku>.csv
        let traj_path = cfg.output_dir.join(format!("trajectory_{sku}.csv"));
        let mut tw = csv_writer(&traj_path)?;
        tw.write_record([
            "date",
            "actual_inv",
            "sim_median",
            "sim_p5",
            "sim_p95",
            "planned_arrivals",
            "actual_arrivals",
        ])
        .map_err(csv_err(&traj_path))?;
        let p5 = crate::backtest::pointwise_inventory_percentile(&r.simulated, 0.05);
        let p95 = crate::backtest::pointwise_inventory_percentile(&r.simulated, 0.95);
        let actual_arrivals = ds.orders.actual_arrivals(ds.span);
        for day in period.days() {
            tw.write_record([
                day.to_string(),
                ds.actual_inventory.get(day).to_string(),
                r.median_trajectory.inventory.get(day).to_string(),
                p5.get(day).to_string(),
                p95.get(day).to_string(),
                (r.nominal.std_arrivals.get(day) + r.nominal.exp_arrivals.get(day)).to_string(),
                actual_arrivals.get(day).to_string(),
            ])
            .map_err(csv_err(&traj_path))?;
        }
        tw.flush().map_err(|e| Error::Io {
            path: traj_path.clone(),
            source: e,
        })?;

        if cfg.dump_kiter {
            for (day, trace) in &r.kiter_traces {
                write_kiter_trace(
                    &cfg.output_dir.join(format!("kiter_{sku}_{day}.csv")),
                    trace,
                )?;
            }
        }
        if cfg.dump_uncertainties {
            let day = r.kiter_traces.last().map(|(d, _)| *d).unwrap_or(period.start);
            crate::uncertainty::write_diagnostics(
                &cfg.output_dir.join(format!("uncertainties_{sku}_{day}.csv")),
                &r.final_uncertainty,
            )?;
        }

        per_sku_terms.insert(sku.clone(), (r.sl, ds.params.target_sl, r.savings_terms));
        let last = r.recommendations.last().map(|&(_, p)| p).unwrap_or(ReorderParams::ZERO);
        per_sku_out.insert(
            sku.clone(),
            SkuMetricsOut {
                sl: r.sl,
                target_sl: ds.params.target_sl,
                s_inv_bar: r.metrics.s_inv_bar,
                s_ss_bar: r.metrics.s_ss_bar,
                s_ss_op: r.metrics.s_ss_op,
                final_ssv: last.ssv,
                final_st: last.st,
                slp: v.slp,
                stp: v.stp,
                n_orders: r.n_orders,
                non_converged: r.non_converged,
            },
        );
        summary.succeeded.push(sku.clone());
    }
    rec.flush().map_err(|e| Error::Io {
        path: rec_path.clone(),
        source: e,
    })?;

    if !per_sku_terms.is_empty() {
        let fleet_metrics = aggregate_metrics(&per_sku_terms)?;
        write_json(
            &cfg.output_dir.join("metrics.json"),
            &MetricsOut {
                r_ad: fleet_metrics.r_ad,
                s_inv_bar: fleet_metrics.s_inv_bar,
                s_ss_bar: fleet_metrics.s_ss_bar,
                s_ss_op: fleet_metrics.s_ss_op,
                per_sku: per_sku_out,
            },
        )?;
    }
    Ok(summary)
}

fn cmd_validate(args: &ValidateArgs) -> Result<i32> {
    let cfg = resolve_config(&args.common)?;
    let inline = match (args.slp, args.stp) {
        (Some(slp), Some(stp)) => Some((slp, stp)),
        (None, None) => None,
        _ => {
            return Err(Error::Config(
                "--slp and --stp must be supplied together".into(),
            ))
        }
    };
    let period = cfg.validation_period()?;
    let fleet = selected_fleet(&cfg)?;
    let outcomes = validate_fleet(&cfg, &fleet, period, inline)?;
    let mut summary = write_validation_outputs(&cfg, &fleet, period, &outcomes)?;
    summary.command = "validate".into();
    let exit = if summary.failed.is_empty() { 0 } else { 1 };
    write_json(&cfg.output_dir.join("run_summary.json"), &summary)?;
    Ok(exit)
}

// --- recommend ------------------------------------------------------------------

fn cmd_recommend(args: &RecommendArgs) -> Result<i32> {
    let cfg = resolve_config(&args.common)?;
    let inline = match (args.slp, args.stp) {
        (Some(slp), Some(stp)) => Some((slp, stp)),
        (None, None) => None,
        _ => {
            return Err(Error::Config(
                "--slp and --stp must be supplied together".into(),
            ))
        }
    };
    let today = match &args.today {
        Some(s) => Day::from_iso(s)?,
        None => cfg.operation_date.ok_or_else(|| {
            Error::Config("no recommendation date: pass --today or set operation_date".into())
        })?,
    };
    // Live production replays the receding loop from the validation start.
    let loop_start = cfg
        .validation
        .map(|v| v.start)
        .ok_or_else(|| Error::Config("recommend needs a validation period start".into()))?;
    let period = DayRange::new(loop_start, today + 1);
    let fleet = selected_fleet(&cfg)?;
    let base = backtest_config(&cfg, period, UswMode::Validation);

    let results: Vec<(String, Result<(ReorderParams, bool)>)> = with_jobs(cfg.jobs, || {
        fleet
            .par_iter()
            .map(|(sku, ds)| {
                let run = || -> Result<(ReorderParams, bool)> {
                    let (slp, stp) = resolve_hypers(&cfg, sku, inline)?;
                    let mut bt = base.clone();
                    bt.fwd.slp = slp;
                    bt.fwd.stp = stp;
                    let (params, outcome) = recommend_live(ds, &bt, today)?;
                    Ok((params, outcome.converged))
                };
                (sku.clone(), run())
            })
            .collect()
    })?;

    let mut summary = RunSummary {
        command: "recommend".into(),
        succeeded: vec![],
        failed: BTreeMap::new(),
        skipped: BTreeMap::new(),
    };
    let rec_path = cfg.output_dir.join("recommendations.csv");
    let mut rec = csv_writer(&rec_path)?;
    rec.write_record(["date", "sku", "ssv", "st"])
        .map_err(csv_err(&rec_path))?;
    for (sku, result) in results {
        match result {
            Ok((params, converged)) => {
                if !converged {
                    log::warn!("{sku}: recommendation did not converge within the iteration cap");
                }
                rec.write_record([
                    today.to_string(),
                    sku.clone(),
                    params.ssv.to_string(),
                    params.st.to_string(),
                ])
                .map_err(csv_err(&rec_path))?;
                summary.succeeded.push(sku);
            }
            Err(e @ Error::Validation { .. }) => {
                // Data gaps skip the SKU rather than failing the fleet.
                log::warn!("skipping {sku}: {e}");
                summary.skipped.insert(sku, e.to_string());
            }
            Err(e) => {
                log::error!("recommendation failed for {sku}: {e}");
                summary.failed.insert(sku, e.to_string());
            }
        }
    }
    rec.flush().map_err(|e| Error::Io {
        path: rec_path.clone(),
        source: e,
    })?;
    let exit = if summary.failed.is_empty() { 0 } else { 1 };
    write_json(&cfg.output_dir.join("run_summary.json"), &summary)?;
    Ok(exit)
}

// --- simulate-mrp ----------------------------------------------------------------

fn cmd_simulate_mrp(args: &SimulateMrpArgs) -> Result<i32> {
    let path = &args.input;
    if !path.exists() {
        return Err(Error::MissingFile { path: path.clone() });
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Io {
        path: path.clone(),
        source: std::io::Error::other(e),
    })?;
    let mut forecast = Vec::new();
    let mut sa = Vec::new();
    let mut ea = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Schema {
            path: path.clone(),
            row: i + 1,
            message: e.to_string(),
        })?;
        let field = |idx: usize, name: &str| -> Result<f64> {
            record
                .get(idx)
                .ok_or_else(|| Error::Schema {
                    path: path.clone(),
                    row: i + 1,
                    message: format!("missing column {name}"),
                })?
                .trim()
                .parse()
                .map_err(|_| Error::Schema {
                    path: path.clone(),
                    row: i + 1,
                    message: format!("invalid number in column {name}"),
                })
        };
        forecast.push(field(1, "forecast")?);
        sa.push(field(2, "std_arrivals")?);
        ea.push(field(3, "exp_arrivals")?);
    }
    if forecast.is_empty() {
        return Err(Error::Schema {
            path: path.clone(),
            row: 0,
            message: "no data rows".into(),
        });
    }
    let horizon = forecast.len() as i64;
    let params = crate::domain::PlanningParams {
        sku_id: "cli".into(),
        lead_time: args.lead_time,
        expedited_lead_time: args.expedited_lead_time,
        ptf: args.ptf,
        moq: args.moq,
        rounding_value: args.rounding_value,
        holding_cost: 0.0,
        order_cost: 0.0,
        target_sl: 1.0,
        horizon,
        seeding_window: args.lead_time.min(horizon),
    };
    params.validate()?;
    let shifted = apply_safety_time(&forecast, args.st);
    let out = run_mrp(&MrpInput {
        starting_inventory: args.x0,
        forecast: shifted.clone(),
        std_arrivals: sa,
        exp_arrivals: ea,
        params,
        ssv: args.ssv,
    });

    let out_path = &args.out;
    let mut w = csv_writer(out_path)?;
    w.write_record([
        "day",
        "forecast",
        "std_arrivals",
        "exp_arrivals",
        "projected_start",
        "projected_end",
    ])
    .map_err(csv_err(out_path))?;
    for i in 0..shifted.len() {
        w.write_record([
            i.to_string(),
            shifted[i].to_string(),
            out.std_arrivals[i].to_string(),
            out.exp_arrivals[i].to_string(),
            out.projected[i].to_string(),
            out.projected[i + 1].to_string(),
        ])
        .map_err(csv_err(out_path))?;
    }
    w.flush().map_err(|e| Error::Io {
        path: out_path.clone(),
        source: e,
    })?;
    Ok(0)
}

// --- sensitivity ----------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepAxis {
    NC,
    NU,
    SlpList,
    BUsw,
    NR,
}

impl SweepAxis {
    fn parse(raw: &str) -> Result<SweepAxis> {
        match raw.to_ascii_lowercase().replace('_', "-").as_str() {
            "n-c" | "nc" => Ok(SweepAxis::NC),
            "n-u" | "nu" => Ok(SweepAxis::NU),
            "slp-list" | "slplist" => Ok(SweepAxis::SlpList),
            "b-usw" | "busw" => Ok(SweepAxis::BUsw),
            "n-r" | "nr" => Ok(SweepAxis::NR),
            other => Err(Error::Config(format!(
                "unknown sensitivity axis {other:?}; expected n-c, n-u, slp-list, b-usw or n-r"
            ))),
        }
    }

    fn label(self) -> &'static str {
        match self {
            SweepAxis::NC => "n_c",
            SweepAxis::NU => "n_u",
            SweepAxis::SlpList => "slp_list",
            SweepAxis::BUsw => "b_usw",
            SweepAxis::NR => "n_r",
        }
    }
}

/// Percent-style candidate lists ("50|70|92.5") become fractions.
fn parse_slp_list(raw: &str) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = raw
        .split('|')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("invalid slp value {s:?}")))
        })
        .collect::<Result<_>>()?;
    if values.iter().any(|&v| v > 1.0) {
        for v in &mut values {
            *v /= 100.0;
        }
    }
    Ok(values)
}

fn cmd_sensitivity(args: &SensitivityArgs) -> Result<i32> {
    let cfg = resolve_config(&args.common)?;
    let axis = SweepAxis::parse(&args.axis)?;
    let period = cfg.validation_period()?;
    let fleet = selected_fleet(&cfg)?;
    let inline = match (args.slp, args.stp) {
        (Some(slp), Some(stp)) => Some((slp, stp)),
        _ => None,
    };

    let sweep_path = cfg.output_dir.join(format!("sensitivity_{}.csv", axis.label()));
    let mut w = csv_writer(&sweep_path)?;
    w.write_record(["axis", "value", "r_ad", "s_inv_bar", "s_ss_bar", "s_ss_op"])
        .map_err(csv_err(&sweep_path))?;

    let raw_values: Vec<String> = if axis == SweepAxis::SlpList {
        args.values.split(';').map(|s| s.trim().to_string()).collect()
    } else {
        args.values.split(',').map(|s| s.trim().to_string()).collect()
    };

    let mut had_failure = false;
    for raw in &raw_values {
        let mut value_cfg = cfg.clone();
        let mut value_inline = inline;
        match axis {
            SweepAxis::NC => {
                value_cfg.model.n_c = raw
                    .parse()
                    .map_err(|_| Error::Config(format!("invalid n_c value {raw:?}")))?
            }
            SweepAxis::NU => {
                value_cfg.model.n_u = raw
                    .parse()
                    .map_err(|_| Error::Config(format!("invalid n_u value {raw:?}")))?
            }
            SweepAxis::BUsw => {
                value_cfg.model.b_usw = raw
                    .parse()
                    .map_err(|_| Error::Config(format!("invalid b_usw value {raw:?}")))?
            }
            SweepAxis::NR => {
                value_cfg.model.n_realizations = raw
                    .parse()
                    .map_err(|_| Error::Config(format!("invalid n_r value {raw:?}")))?
            }
            SweepAxis::SlpList => {
                // Sweeping the candidate list re-trains per value.
                value_cfg.grid = HyperGrid::new(parse_slp_list(raw)?, cfg.grid.stp_candidates.clone())?;
                value_inline = None;
                let training = value_cfg.training_period()?;
                let base = backtest_config(&value_cfg, training, UswMode::Training);
                for (sku, ds) in &fleet {
                    let report = train(ds, &value_cfg.grid, &base, training)?;
                    write_json(
                        &value_cfg.output_dir.join(format!("train_report_{sku}.json")),
                        &report,
                    )?;
                }
            }
        }
        let outcomes = validate_fleet(&value_cfg, &fleet, period, value_inline)?;
        let mut terms: BTreeMap<String, (f64, f64, SavingsTerms)> = BTreeMap::new();
        for (sku, outcome) in &outcomes {
            match outcome {
                Ok(v) => {
                    terms.insert(
                        sku.clone(),
                        (v.result.sl, fleet[sku].params.target_sl, v.result.savings_terms),
                    );
                }
                Err(e) => {
                    log::error!("sweep value {raw}: {sku} failed: {e}");
                    had_failure = true;
                }
            }
        }
        if terms.is_empty() {
            continue;
        }
        let metrics = aggregate_metrics(&terms)?;
        w.write_record([
            axis.label().to_string(),
            raw.clone(),
            metrics.r_ad.to_string(),
            metrics.s_inv_bar.to_string(),
            metrics.s_ss_bar.to_string(),
            metrics.s_ss_op.to_string(),
        ])
        .map_err(csv_err(&sweep_path))?;
    }
    w.flush().map_err(|e| Error::Io {
        path: sweep_path.clone(),
        source: e,
    })?;
    Ok(if had_failure { 1 } else { 0 })
}
