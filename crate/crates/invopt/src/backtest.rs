//! Receding-horizon validation / live-recommendation loop.
//!
//! At every sampling time (every `frequency` days) the loop rebuilds the
//! uncertainty distributions over the sampling window, infers reorder
//! parameters with the lifting loop, and holds them until the next sampling
//! time. In between, the order-simulation step runs the MRP daily against
//! an arrival book, rolling a nominal simulated inventory forward on actual
//! consumption and actual movements. At the end, the realized plan is
//! perturbed into `n_os` realizations and scored against the actual
//! inventory (adherence rate and the three savings ratios).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::domain::{
    holding_cost_of_series, level_set, service_level, DailySeries, Day, DayRange, ReorderParams,
    Trajectory,
};
use crate::ingest::SkuDataset;
use crate::mrp::{apply_safety_time, run_mrp, MrpInput};
use crate::optimizer::{
    k_iteration, ForwardSimConfig, KIterationOutcome, KIterationStep, SamplingContext,
};
use crate::rng::{Purpose, StreamKey};
use crate::uncertainty::{
    build_uncertainty_set, percentile_of, usw_window, UncertaintySet, UswMode,
};
use crate::{Error, Result};

/// Configuration of one backtest run over a period.
#[derive(Debug, Clone)]
pub struct BacktestConfig {
    pub period: DayRange,
    /// Days between reorder-parameter recomputations.
    pub frequency: i64,
    /// Realizations of the full-period simulated inventory (N_os).
    pub n_os: u32,
    /// Forward-simulation knobs; `sl_min` is overridden per SKU by the
    /// dataset's target service level.
    pub fwd: ForwardSimConfig,
    pub usw_mode: UswMode,
    /// Buffer added to the lead time for the initial window length.
    pub b_usw: i64,
    /// Minimum initial window length.
    pub l_min_usw: i64,
    /// Demand-forecast clip multiplier.
    pub n_c: f64,
    /// Residual clip multiplier.
    pub n_u: f64,
    pub seed: u64,
}

impl BacktestConfig {
    pub fn validate(&self) -> Result<()> {
        self.fwd.validate()?;
        if self.period.is_empty() {
            return Err(Error::Config(format!(
                "empty backtest period {}",
                self.period
            )));
        }
        if self.frequency < 1 {
            return Err(Error::Config(format!(
                "frequency must be >= 1 day, got {}",
                self.frequency
            )));
        }
        if self.frequency > self.period.len() {
            return Err(Error::Config(format!(
                "frequency {} exceeds period length {}",
                self.frequency,
                self.period.len()
            )));
        }
        if self.n_os == 0 {
            return Err(Error::Config("n_os must be >= 1".into()));
        }
        if self.n_c <= 0.0 || self.n_u <= 0.0 {
            return Err(Error::Config("clip multipliers must be positive".into()));
        }
        Ok(())
    }
}

/// Scores of one backtest against the actual history.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    /// Share of SKUs whose simulated service level met the target.
    pub r_ad: f64,
    /// Inventory holding cost saving over the period.
    pub s_inv_bar: f64,
    /// Safety-stock holding cost saving over the period.
    pub s_ss_bar: f64,
    /// Safety-stock holding cost saving at the operation date.
    pub s_ss_op: f64,
    /// Simulated service level per SKU.
    pub per_sku_sl: BTreeMap<String, f64>,
}

/// Per-SKU raw savings terms; fleet metrics are ratio-of-sums over these.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SavingsTerms {
    /// Numerator sum((x_a - x_sim) * pi_h).
    pub inv_num: f64,
    /// Numerator sum((ssv_a - ssv_sim) * pi_h).
    pub ss_num: f64,
    /// Numerator n_days * (ssv_a_op - ssv_sim_op) * pi_h.
    pub ss_op_num: f64,
    /// Denominator sum(x_a * pi_h): actual inventory holding cost.
    pub denom: f64,
}

impl SavingsTerms {
    pub fn ratios(&self) -> Result<(f64, f64, f64)> {
        if self.denom == 0.0 {
            return Err(Error::UndefinedSavings);
        }
        Ok((
            self.inv_num / self.denom,
            self.ss_num / self.denom,
            self.ss_op_num / self.denom,
        ))
    }
}

/// Outcome of a backtest for one SKU.
#[derive(Debug, Clone)]
pub struct BacktestResult {
    /// One entry per sampling time; held constant in between.
    pub recommendations: Vec<(Day, ReorderParams)>,
    /// The nominal replay: planned arrivals against actual consumption.
    pub nominal: Trajectory,
    /// The `n_os` arrival-perturbed realizations of the replay.
    pub simulated: Vec<Trajectory>,
    /// Pointwise aggregation-percentile of the realizations.
    pub median_trajectory: Trajectory,
    /// Single-SKU metrics (fleet aggregation happens in the CLI layer).
    pub metrics: MetricsReport,
    pub savings_terms: SavingsTerms,
    /// Aggregation-percentile of per-realization service levels, measured
    /// on the period after the first lead time.
    pub sl: f64,
    /// Realized arrival events (count drives the per-order cost).
    pub n_orders: u64,
    /// Sampling times whose lifting loop hit the iteration cap.
    pub non_converged: u32,
    /// Per-sampling-time lifting traces, for diagnostics.
    pub kiter_traces: Vec<(Day, Vec<KIterationStep>)>,
    /// The uncertainty set of the final sampling time.
    pub final_uncertainty: UncertaintySet,
    /// Total cost of the aggregated path (holding + per-order costs).
    pub median_cost: f64,
}

/// Expand sampling-time recommendations into per-day stair steps.
pub fn staircase(
    recommendations: &[(Day, ReorderParams)],
    period: DayRange,
) -> Vec<(Day, ReorderParams)> {
    let mut out = Vec::with_capacity(period.len() as usize);
    let mut current = recommendations
        .first()
        .map(|&(_, r)| r)
        .unwrap_or(ReorderParams::ZERO);
    let mut idx = 0;
    for d in period.days() {
        while idx < recommendations.len() && recommendations[idx].0 <= d {
            current = recommendations[idx].1;
            idx += 1;
        }
        out.push((d, current));
    }
    out
}

/// Service-level adherence rate: the share of SKUs whose simulated service
/// level is at least the target (a zero gap counts as adherent).
pub fn adherence_rate(sls: &[f64], targets: &[f64]) -> Result<f64> {
    if sls.is_empty() || sls.len() != targets.len() {
        return Err(Error::Range(format!(
            "adherence rate needs equal non-empty lists, got {} and {}",
            sls.len(),
            targets.len()
        )));
    }
    let adherent: f64 = sls
        .iter()
        .zip(targets)
        .map(|(&sl, &target)| level_set(sl - target))
        .sum();
    Ok(adherent / sls.len() as f64)
}

/// The three savings ratios for aligned actual/simulated paths. All three
/// share the same denominator: the actual inventory holding cost.
pub fn savings(
    actual_inventory: &[f64],
    simulated_inventory: &[f64],
    actual_ssv: &[f64],
    simulated_ssv: &[f64],
    actual_ssv_op: f64,
    simulated_ssv_op: f64,
    holding_cost: f64,
) -> Result<(f64, f64, f64)> {
    savings_terms(
        actual_inventory,
        simulated_inventory,
        actual_ssv,
        simulated_ssv,
        actual_ssv_op,
        simulated_ssv_op,
        holding_cost,
    )?
    .ratios()
}

fn savings_terms(
    actual_inventory: &[f64],
    simulated_inventory: &[f64],
    actual_ssv: &[f64],
    simulated_ssv: &[f64],
    actual_ssv_op: f64,
    simulated_ssv_op: f64,
    holding_cost: f64,
) -> Result<SavingsTerms> {
    let n = actual_inventory.len();
    if n == 0
        || simulated_inventory.len() != n
        || actual_ssv.len() != n
        || simulated_ssv.len() != n
    {
        return Err(Error::Range("savings need aligned non-empty paths".into()));
    }
    let mut inv_num = 0.0;
    let mut ss_num = 0.0;
    let mut denom = 0.0;
    for i in 0..n {
        inv_num += (actual_inventory[i] - simulated_inventory[i]) * holding_cost;
        ss_num += (actual_ssv[i] - simulated_ssv[i]) * holding_cost;
        denom += actual_inventory[i] * holding_cost;
    }
    let ss_op_num = n as f64 * (actual_ssv_op - simulated_ssv_op) * holding_cost;
    Ok(SavingsTerms {
        inv_num,
        ss_num,
        ss_op_num,
        denom,
    })
}

struct LoopOutput {
    recommendations: Vec<(Day, ReorderParams)>,
    nominal: Trajectory,
    /// (day, quantity, expedited) realized arrival events, chronological.
    realized: Vec<(Day, f64, bool)>,
    last_uset: UncertaintySet,
    last_outcome: KIterationOutcome,
    kiter_traces: Vec<(Day, Vec<KIterationStep>)>,
    n_orders: u64,
    non_converged: u32,
}

/// Check that the dataset covers the sampling windows of the period.
fn check_coverage(dataset: &SkuDataset, cfg: &BacktestConfig, period: DayRange) -> Result<()> {
    let sku = &dataset.params.sku_id;
    let span = dataset.span;
    if period.start < span.start || period.start >= span.end {
        return Err(Error::Validation {
            sku: sku.clone(),
            message: format!("period {period} starts outside data span {span}"),
        });
    }
    let usw0 = usw_window(
        (period.start + 1).min(period.end),
        period,
        dataset.params.lead_time,
        cfg.b_usw,
        cfg.l_min_usw,
        cfg.usw_mode,
    )?;
    if usw0.start < span.start || usw0.end > span.end {
        return Err(Error::Validation {
            sku: sku.clone(),
            message: format!("uncertainty sampling window {usw0} not covered by data span {span}"),
        });
    }
    Ok(())
}

/// Run the receding-horizon loop over `period`. When `force_sample` names a
/// day, a sampling time is inserted there even if off the frequency grid
/// (used by the live mode to optimize exactly at "today").
fn receding_loop(
    dataset: &SkuDataset,
    cfg: &BacktestConfig,
    period: DayRange,
    force_sample: Option<Day>,
) -> Result<LoopOutput> {
    let params = &dataset.params;
    let h = params.horizon as usize;
    let sku = &params.sku_id;
    let mut fwd = cfg.fwd;
    fwd.sl_min = params.target_sl;

    // Arrival book over [period.start, period.end + H). Only orders truly
    // in flight at the period start seed it: those planned to arrive
    // within the seeding window. Later ledger orders would have been
    // placed after the switch to the recommended policy, so the simulated
    // MRP owns those decisions.
    let book_span = DayRange::new(period.start, period.end + params.horizon);
    let mut book_std = DailySeries::zeros(book_span.start, book_span.len());
    let mut book_exp = DailySeries::zeros(book_span.start, book_span.len());
    let in_flight = DayRange::new(period.start, period.start + params.seeding_window);
    for o in &dataset.orders.orders {
        if in_flight.contains(o.planned_date) {
            book_std.add(o.planned_date, o.planned_qty);
        }
    }

    let n = period.len() as usize;
    let mut nominal_inv = vec![0.0; n];
    let mut nominal_std = vec![0.0; n];
    let mut nominal_exp = vec![0.0; n];
    let mut nominal_cons = vec![0.0; n];
    let mut realized = Vec::new();
    let mut recommendations = Vec::new();
    let mut kiter_traces = Vec::new();
    let mut current: Option<ReorderParams> = None;
    let mut last_uset: Option<UncertaintySet> = None;
    let mut last_outcome: Option<KIterationOutcome> = None;
    let mut n_orders = 0u64;
    let mut non_converged = 0u32;

    // The simulated world starts from the actual inventory.
    let mut x_sim = dataset.actual_inventory.get(period.start);

    for (day_idx, d) in period.days().enumerate() {
        let on_grid = (d - period.start) % cfg.frequency == 0;
        if on_grid || force_sample == Some(d) {
            let usw = usw_window(
                d,
                period,
                params.lead_time,
                cfg.b_usw,
                cfg.l_min_usw,
                cfg.usw_mode,
            )?;
            let uset = build_uncertainty_set(dataset, usw, fwd.stp, cfg.n_c, cfg.n_u)?;
            // Seed with everything already booked to arrive, standard and
            // expedited alike.
            let mut seeded = DailySeries::zeros(d, params.seeding_window.max(1));
            for i in 0..params.seeding_window {
                seeded.set(d + i, book_std.get(d + i) + book_exp.get(d + i));
            }
            let ctx = SamplingContext {
                seed: cfg.seed,
                sku,
                sampling_time: d,
            };
            let outcome = k_iteration(dataset, d, &uset, &fwd, &seeded, &ctx)?;
            if !outcome.converged {
                non_converged += 1;
            }
            recommendations.push((d, outcome.reorder));
            kiter_traces.push((d, outcome.trace.clone()));
            current = Some(outcome.reorder);
            last_uset = Some(uset);
            last_outcome = Some(outcome);
        }
        let reorder = current.expect("first period day is a sampling time");

        // Daily MRP run against the book; the output overwrites the plan.
        let raw_row = dataset.forecasts.row(d, params.horizon);
        let shifted = apply_safety_time(&raw_row, reorder.st);
        let sa: Vec<f64> = (0..params.horizon).map(|i| book_std.get(d + i)).collect();
        let ea: Vec<f64> = (0..params.horizon).map(|i| book_exp.get(d + i)).collect();
        let out = run_mrp(&MrpInput {
            starting_inventory: x_sim,
            forecast: shifted,
            std_arrivals: sa,
            exp_arrivals: ea,
            params: params.clone(),
            ssv: reorder.ssv,
        });
        for i in 0..h {
            book_std.set(d + i as i64, out.std_arrivals[i]);
            book_exp.set(d + i as i64, out.exp_arrivals[i]);
        }

        // Today's arrivals are now final; roll the nominal inventory on
        // actual consumption and actual movements.
        let arr_std = book_std.get(d);
        let arr_exp = book_exp.get(d);
        if arr_std > 0.0 {
            realized.push((d, arr_std, false));
            n_orders += 1;
        }
        if arr_exp > 0.0 {
            realized.push((d, arr_exp, true));
            n_orders += 1;
        }
        let consumed = dataset.actual_consumption.get(d) + dataset.movement_sum(d);
        nominal_inv[day_idx] = x_sim;
        nominal_std[day_idx] = arr_std;
        nominal_exp[day_idx] = arr_exp;
        nominal_cons[day_idx] = consumed;
        x_sim = x_sim + arr_std + arr_exp - consumed;
    }

    let start = period.start;
    Ok(LoopOutput {
        recommendations,
        nominal: Trajectory::new(
            DailySeries::new(start, nominal_inv),
            DailySeries::new(start, nominal_std),
            DailySeries::new(start, nominal_exp),
            DailySeries::new(start, nominal_cons),
        ),
        realized,
        last_uset: last_uset.expect("at least one sampling time"),
        last_outcome: last_outcome.expect("at least one sampling time"),
        kiter_traces,
        n_orders,
        non_converged,
    })
}

/// Perturb the realized plan into `n_os` full-period realizations: every
/// realized arrival gets a sampled delay and quantity shortage from the
/// final sampling time's distributions (whose growing window contains every
/// earlier one); consumption and movements stay actual.
fn order_sim_realizations(
    dataset: &SkuDataset,
    cfg: &BacktestConfig,
    period: DayRange,
    loop_out: &LoopOutput,
) -> Vec<Trajectory> {
    let uset = &loop_out.last_uset;
    let sku = &dataset.params.sku_id;
    let n = period.len() as usize;
    (0..cfg.n_os)
        .map(|r| {
            let mut delay_rng = StreamKey {
                seed: cfg.seed,
                sku,
                sampling_time: period.start,
                realization: r,
                purpose: Purpose::OrderSimDelay,
            }
            .rng();
            let mut shortage_rng = StreamKey {
                seed: cfg.seed,
                sku,
                sampling_time: period.start,
                realization: r,
                purpose: Purpose::OrderSimShortage,
            }
            .rng();
            let mut std_arr = vec![0.0; n];
            let mut exp_arr = vec![0.0; n];
            for &(day, qty, expedited) in &loop_out.realized {
                let delay = uset.u_st.draw(&mut delay_rng).round() as i64;
                let shortage = uset.u_sq.draw(&mut shortage_rng);
                let landing = day + delay.max(0);
                if period.contains(landing) {
                    let sampled = (qty + shortage).max(0.0);
                    let idx = (landing - period.start) as usize;
                    if expedited {
                        exp_arr[idx] += sampled;
                    } else {
                        std_arr[idx] += sampled;
                    }
                }
            }
            let mut inventory = vec![0.0; n];
            inventory[0] = dataset.actual_inventory.get(period.start);
            let mut consumption = vec![0.0; n];
            for (i, d) in period.days().enumerate() {
                let consumed = dataset.actual_consumption.get(d) + dataset.movement_sum(d);
                consumption[i] = consumed;
                if i + 1 < n {
                    inventory[i + 1] = inventory[i] + std_arr[i] + exp_arr[i] - consumed;
                }
            }
            Trajectory::new(
                DailySeries::new(period.start, inventory),
                DailySeries::new(period.start, std_arr),
                DailySeries::new(period.start, exp_arr),
                DailySeries::new(period.start, consumption),
            )
        })
        .collect()
}

/// Pointwise nearest-rank percentile of the inventory paths of a set of
/// trajectories (column-by-column over days).
pub fn pointwise_inventory_percentile(trajectories: &[Trajectory], p: f64) -> DailySeries {
    let start = trajectories[0].start();
    let n = trajectories[0].len();
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let day = start + i;
            let column: Vec<f64> = trajectories.iter().map(|t| t.inventory.get(day)).collect();
            percentile_of(&column, p)
        })
        .collect();
    DailySeries::new(start, values)
}

/// Run the full backtest for one SKU.
pub fn run_backtest(dataset: &SkuDataset, cfg: &BacktestConfig) -> Result<BacktestResult> {
    cfg.validate()?;
    dataset.params.validate()?;
    let period = cfg.period;
    check_coverage(dataset, cfg, period)?;
    let span = dataset.span;
    if period.end > span.end {
        return Err(Error::Validation {
            sku: dataset.params.sku_id.clone(),
            message: format!("period {period} not covered by data span {span}"),
        });
    }
    if period.len() <= dataset.params.lead_time {
        return Err(Error::Validation {
            sku: dataset.params.sku_id.clone(),
            message: format!(
                "period length {} does not exceed the lead time {}",
                period.len(),
                dataset.params.lead_time
            ),
        });
    }

    let loop_out = receding_loop(dataset, cfg, period, None)?;
    let simulated = order_sim_realizations(dataset, cfg, period, &loop_out);
    let p_agg = cfg.fwd.aggregation_percentile;
    let median_inventory = pointwise_inventory_percentile(&simulated, p_agg);
    let median_trajectory = Trajectory::new(
        median_inventory,
        loop_out.nominal.std_arrivals.clone(),
        loop_out.nominal.exp_arrivals.clone(),
        loop_out.nominal.consumption.clone(),
    );

    // Service level: aggregation percentile of per-realization service
    // levels, measured after the first lead time (earlier days are
    // inherited from history and cannot be influenced).
    let scored = DayRange::new(period.start + dataset.params.lead_time, period.end);
    let sls: Vec<f64> = simulated
        .iter()
        .map(|t| service_level(t, scored))
        .collect::<Result<_>>()?;
    let sl = percentile_of(&sls, p_agg);

    // Savings against actuals: the simulated path is the aggregated one.
    let stairs = staircase(&loop_out.recommendations, period);
    let sim_ssv: Vec<f64> = stairs.iter().map(|&(_, r)| r.ssv).collect();
    let actual_ssv = vec![dataset.actual_reorder.ssv; period.len() as usize];
    let actual_inv = dataset.actual_inventory.slice(period)?;
    let terms = savings_terms(
        actual_inv,
        median_trajectory.inventory.values(),
        &actual_ssv,
        &sim_ssv,
        dataset.actual_reorder.ssv,
        loop_out
            .recommendations
            .last()
            .map(|&(_, r)| r.ssv)
            .unwrap_or(0.0),
        dataset.params.holding_cost,
    )?;
    let (s_inv_bar, s_ss_bar, s_ss_op) = terms.ratios()?;

    let median_cost = holding_cost_of_series(
        &median_trajectory.inventory,
        dataset.params.holding_cost,
    ) + dataset.params.order_cost * loop_out.n_orders as f64;

    let mut per_sku_sl = BTreeMap::new();
    per_sku_sl.insert(dataset.params.sku_id.clone(), sl);
    let metrics = MetricsReport {
        r_ad: adherence_rate(&[sl], &[dataset.params.target_sl])?,
        s_inv_bar,
        s_ss_bar,
        s_ss_op,
        per_sku_sl,
    };

    Ok(BacktestResult {
        recommendations: loop_out.recommendations,
        nominal: loop_out.nominal,
        simulated,
        median_trajectory,
        metrics,
        savings_terms: terms,
        sl,
        n_orders: loop_out.n_orders,
        non_converged: loop_out.non_converged,
        kiter_traces: loop_out.kiter_traces,
        final_uncertainty: loop_out.last_uset,
        median_cost,
    })
}

/// Live recommendation: run the same receding loop from the period start
/// through `today`, optimizing exactly at `today`, and keep only the final
/// inference. No comparison against actuals is made.
pub fn recommend_live(
    dataset: &SkuDataset,
    cfg: &BacktestConfig,
    today: Day,
) -> Result<(ReorderParams, KIterationOutcome)> {
    cfg.validate()?;
    dataset.params.validate()?;
    if today < cfg.period.start {
        return Err(Error::Config(format!(
            "today {today} precedes the simulation start {}",
            cfg.period.start
        )));
    }
    if dataset.span.end < today {
        return Err(Error::Validation {
            sku: dataset.params.sku_id.clone(),
            message: format!(
                "data ends {} before today {today}; cannot sample uncertainties",
                dataset.span.end
            ),
        });
    }
    let period = DayRange::new(cfg.period.start, today + 1);
    check_coverage(dataset, cfg, period)?;
    let loop_out = receding_loop(dataset, cfg, period, Some(today))?;
    let outcome = loop_out.last_outcome;
    Ok((outcome.reorder, outcome))
}

/// Aggregate per-SKU backtests into fleet metrics: adherence over SKUs,
/// savings as ratio of summed terms. Values are (sl, target, terms).
pub fn aggregate_metrics(
    per_sku: &BTreeMap<String, (f64, f64, SavingsTerms)>,
) -> Result<MetricsReport> {
    let sls: Vec<f64> = per_sku.values().map(|&(sl, _, _)| sl).collect();
    let targets: Vec<f64> = per_sku.values().map(|&(_, t, _)| t).collect();
    let r_ad = adherence_rate(&sls, &targets)?;
    let mut total = SavingsTerms {
        inv_num: 0.0,
        ss_num: 0.0,
        ss_op_num: 0.0,
        denom: 0.0,
    };
    for (_, _, t) in per_sku.values() {
        total.inv_num += t.inv_num;
        total.ss_num += t.ss_num;
        total.ss_op_num += t.ss_op_num;
        total.denom += t.denom;
    }
    let (s_inv_bar, s_ss_bar, s_ss_op) = total.ratios()?;
    Ok(MetricsReport {
        r_ad,
        s_inv_bar,
        s_ss_bar,
        s_ss_op,
        per_sku_sl: per_sku
            .iter()
            .map(|(sku, &(sl, _, _))| (sku.clone(), sl))
            .collect(),
    })
}
