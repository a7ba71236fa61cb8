//! Per-sampling-time reorder-parameter inference.
//!
//! At a sampling time the safety time is read off the supplier-delay
//! distribution at the configured percentile, and the safety stock value is
//! found by iterative lifting: run one MRP simulation from a steady-state
//! initial inventory, perturb it into a batch of uncertainty realizations,
//! measure the inventory deficit that keeps the required share of
//! realizations at the target service level, lift the SSV by that deficit,
//! and repeat until no lift is needed (or the iteration cap is hit).
//!
//! Perturbation draws are keyed by (seed, SKU, sampling time, realization,
//! purpose, day) and never by iteration, so every iteration of the lifting
//! loop re-uses the same realization noise.

use rayon::prelude::*;

use crate::domain::{DailySeries, Day, DayRange, PlanningParams, ReorderParams, Trajectory};
use crate::ingest::SkuDataset;
use crate::mrp::{run_mrp, MrpInput, MrpOutput};
use crate::rng::{Purpose, StreamKey};
use crate::uncertainty::{percentile_of, UncertaintySet};
use crate::{Error, Result};

/// Deficits at or below this are float dust, not a real lift.
const DEFICIT_EPS: f64 = 1e-9;

/// Knobs of the forward-looking simulation and the lifting loop.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct ForwardSimConfig {
    /// Realizations per iteration (N_r).
    pub n_realizations: u32,
    /// Service level percentile: share of realizations that must meet the
    /// target service level.
    pub slp: f64,
    /// Safety time percentile on the supplier-delay distribution.
    pub stp: f64,
    /// Minimum target service level.
    pub sl_min: f64,
    /// Cap on lifting iterations.
    pub max_iterations: u32,
    /// Percentile used when aggregating over realizations for reporting
    /// (0.5 = median).
    pub aggregation_percentile: f64,
}

impl ForwardSimConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("slp", self.slp),
            ("stp", self.stp),
            ("sl_min", self.sl_min),
            ("aggregation_percentile", self.aggregation_percentile),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must be in [0,1], got {v}")));
            }
        }
        if self.n_realizations == 0 {
            return Err(Error::Config("n_realizations must be >= 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Identifies the stochastic scope of one optimization call.
#[derive(Debug, Clone, Copy)]
pub struct SamplingContext<'a> {
    pub seed: u64,
    pub sku: &'a str,
    pub sampling_time: Day,
}

/// Inputs of one forward-looking simulation.
#[derive(Debug, Clone)]
pub struct ForwardInputs<'a> {
    pub params: &'a PlanningParams,
    /// Forecast row at the sampling time, safety-time shifted; fed to MRP.
    pub shifted_forecast: Vec<f64>,
    /// Unshifted forecast row; consumption basis for the realizations.
    pub raw_forecast: Vec<f64>,
    /// Arrivals seeded from the previous sampling time, dense over the
    /// horizon (zero beyond the seeding window).
    pub seeded_std: Vec<f64>,
    pub ssv: f64,
}

/// One MRP plan plus its batch of perturbed inventory realizations.
#[derive(Debug, Clone)]
pub struct RealizationBundle {
    pub base: MrpOutput,
    pub trajectories: Vec<Trajectory>,
    pub start: Day,
    pub seeded_arrivals: DailySeries,
}

/// Steady-state initial inventory: the level that rolls forward (under the
/// planned forecast and the seeded arrivals) to exactly `ssv` at the lead
/// time. May be negative; days inside the lead time are not scored.
pub fn steady_state_x0(ssv: f64, forecast: &[f64], seeded_arrivals: &[f64], lead_time: i64) -> f64 {
    let lt = lead_time as usize;
    assert!(seeded_arrivals.len() >= lt && forecast.len() >= lt);
    let demand: f64 = forecast[..lt].iter().sum();
    let arriving: f64 = seeded_arrivals[..lt].iter().sum();
    ssv + demand - arriving
}

/// Per-realization perturbation draws, indexed by horizon day.
struct Perturbation {
    df: Vec<f64>,
    mm: Vec<f64>,
    std_delay: Vec<i64>,
    std_shortage: Vec<f64>,
    exp_delay: Vec<i64>,
    exp_shortage: Vec<f64>,
}

fn draw_table(
    ctx: &SamplingContext,
    r: u32,
    purpose: Purpose,
    dist: &crate::uncertainty::EmpiricalDistribution,
    horizon: usize,
) -> Vec<f64> {
    let mut rng = StreamKey {
        seed: ctx.seed,
        sku: ctx.sku,
        sampling_time: ctx.sampling_time,
        realization: r,
        purpose,
    }
    .rng();
    (0..horizon).map(|_| dist.draw(&mut rng)).collect()
}

fn draw_perturbation(
    ctx: &SamplingContext,
    r: u32,
    uset: &UncertaintySet,
    horizon: usize,
) -> Perturbation {
    let to_days = |v: Vec<f64>| v.into_iter().map(|x| x.round() as i64).collect();
    Perturbation {
        df: draw_table(ctx, r, Purpose::DemandForecast, &uset.u_df, horizon),
        mm: draw_table(ctx, r, Purpose::Movement, &uset.u_mm, horizon),
        std_delay: to_days(draw_table(ctx, r, Purpose::StdDelay, &uset.u_st, horizon)),
        std_shortage: draw_table(ctx, r, Purpose::StdShortage, &uset.u_sq, horizon),
        exp_delay: to_days(draw_table(ctx, r, Purpose::ExpDelay, &uset.u_st, horizon)),
        exp_shortage: draw_table(ctx, r, Purpose::ExpShortage, &uset.u_sq, horizon),
    }
}

/// Run the base MRP once, then perturb its plan into `n_realizations`
/// inventory realizations: per-day sampled consumption
/// (forecast minus demand residual) plus movement, per-order sampled
/// arrival delay and quantity shortage (quantity floored at zero, arrivals
/// pushed past the horizon dropped).
pub fn forward_simulate(
    inputs: &ForwardInputs,
    uset: &UncertaintySet,
    cfg: &ForwardSimConfig,
    ctx: &SamplingContext,
) -> RealizationBundle {
    let p = inputs.params;
    let h = p.horizon as usize;
    let x0 = steady_state_x0(
        inputs.ssv,
        &inputs.shifted_forecast,
        &inputs.seeded_std,
        p.lead_time,
    );
    let base = run_mrp(&MrpInput {
        starting_inventory: x0,
        forecast: inputs.shifted_forecast.clone(),
        std_arrivals: inputs.seeded_std.clone(),
        exp_arrivals: vec![0.0; h],
        params: p.clone(),
        ssv: inputs.ssv,
    });

    // Every planned arrival in the base output is an order subject to
    // supplier uncertainty, seeded and newly placed alike.
    let mut orders: Vec<(usize, f64, bool)> = Vec::new();
    for i in 0..h {
        if base.std_arrivals[i] > 0.0 {
            orders.push((i, base.std_arrivals[i], false));
        }
        if base.exp_arrivals[i] > 0.0 {
            orders.push((i, base.exp_arrivals[i], true));
        }
    }

    let start = ctx.sampling_time;
    let trajectories: Vec<Trajectory> = (0..cfg.n_realizations)
        .into_par_iter()
        .map(|r| {
            let draws = draw_perturbation(ctx, r, uset, h);
            let mut std_arr = vec![0.0; h];
            let mut exp_arr = vec![0.0; h];
            for &(i, qty, expedited) in &orders {
                let (delay, shortage) = if expedited {
                    (draws.exp_delay[i], draws.exp_shortage[i])
                } else {
                    (draws.std_delay[i], draws.std_shortage[i])
                };
                let landing = i + delay.max(0) as usize;
                if landing < h {
                    let sampled_qty = (qty + shortage).max(0.0);
                    if expedited {
                        exp_arr[landing] += sampled_qty;
                    } else {
                        std_arr[landing] += sampled_qty;
                    }
                }
            }
            let mut inventory = vec![0.0; h];
            inventory[0] = x0;
            let mut consumption = vec![0.0; h];
            for tau in 0..h {
                let consumed = (inputs.raw_forecast[tau] - draws.df[tau]) + draws.mm[tau];
                consumption[tau] = consumed;
                if tau + 1 < h {
                    inventory[tau + 1] = inventory[tau] - consumed + std_arr[tau] + exp_arr[tau];
                }
            }
            Trajectory::new(
                DailySeries::new(start, inventory),
                DailySeries::new(start, std_arr),
                DailySeries::new(start, exp_arr),
                DailySeries::new(start, consumption),
            )
        })
        .collect();

    let t_s = (p.seeding_window as usize).min(h);
    RealizationBundle {
        base,
        trajectories,
        start,
        seeded_arrivals: DailySeries::new(start, inputs.seeded_std[..t_s].to_vec()),
    }
}

/// The scoring window for a sampling time: `[LT, min(2·LT + ST, H))`
/// relative to its start. Days inside the lead time cannot be influenced
/// by the SSV choice, and days beyond `2·LT + ST` will be re-planned at the
/// next sampling time.
pub fn scoring_window(params: &PlanningParams, st: i64, start: Day) -> Result<DayRange> {
    let lt = params.lead_time;
    let end = (2 * lt + st).min(params.horizon);
    let window = DayRange::new(start + lt, start + end);
    if window.is_empty() {
        return Err(Error::Config(format!(
            "empty scoring window: lead_time {lt}, st {st}, horizon {}",
            params.horizon
        )));
    }
    Ok(window)
}

/// Minimal uniform inventory lift `h >= 0` such that, after lifting every
/// realization by `h`, the `slp`-percentile of per-realization service
/// levels over `scoring` reaches `sl_min`. Zero iff the constraint already
/// holds.
///
/// Per realization the minimal lift is an order statistic: with
/// `m = floor((1 - sl_min) * W)` negative days allowed out of `W`, the
/// `(m+1)`-th smallest inventory value must be lifted to zero. The bundle
/// deficit is the `slp`-percentile (nearest-rank) of the per-realization
/// lifts.
pub fn inventory_deficit(
    bundle: &RealizationBundle,
    slp: f64,
    sl_min: f64,
    scoring: DayRange,
) -> Result<f64> {
    if scoring.is_empty() {
        return Err(Error::Config(format!("empty scoring window {scoring}")));
    }
    let mut lifts = Vec::with_capacity(bundle.trajectories.len());
    for traj in &bundle.trajectories {
        let window = traj.inventory.slice(scoring)?;
        let w = window.len();
        let allowed_negative = ((1.0 - sl_min) * w as f64 + 1e-9).floor() as usize;
        let lift = if allowed_negative >= w {
            0.0
        } else {
            let mut sorted = window.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (-sorted[allowed_negative]).max(0.0)
        };
        lifts.push(lift);
    }
    let h = percentile_of(&lifts, slp);
    Ok(if h <= DEFICIT_EPS { 0.0 } else { h })
}

/// One step of the lifting loop, kept for diagnostics.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct KIterationStep {
    pub iteration: u32,
    pub ssv: f64,
    pub deficit: f64,
    /// Share of realizations meeting the target service level at this SSV.
    pub slp_attained: f64,
}

/// Outcome of the lifting loop at one sampling time.
#[derive(Debug, Clone)]
pub struct KIterationOutcome {
    pub reorder: ReorderParams,
    pub bundle: RealizationBundle,
    pub converged: bool,
    pub trace: Vec<KIterationStep>,
}

fn attained_share(bundle: &RealizationBundle, sl_min: f64, scoring: DayRange) -> Result<f64> {
    let mut meeting = 0usize;
    for traj in &bundle.trajectories {
        let sl = crate::domain::service_level(traj, scoring)?;
        if sl >= sl_min - 1e-12 {
            meeting += 1;
        }
    }
    Ok(meeting as f64 / bundle.trajectories.len() as f64)
}

/// Infer the reorder parameters at sampling time `t`.
///
/// The safety time is the `stp`-percentile of the supplier-delay
/// distribution, fixed across iterations. The SSV starts at zero and is
/// lifted by the inventory deficit until the deficit vanishes; hitting the
/// iteration cap with a positive deficit returns the lifted SSV flagged as
/// non-converged.
pub fn k_iteration(
    dataset: &SkuDataset,
    t: Day,
    uset: &UncertaintySet,
    cfg: &ForwardSimConfig,
    seeded_std: &DailySeries,
    ctx: &SamplingContext,
) -> Result<KIterationOutcome> {
    cfg.validate()?;
    let params = &dataset.params;
    let h = params.horizon as usize;

    let st = uset.u_st.percentile(cfg.stp).round() as i64;
    let scoring = scoring_window(params, st, t)?;

    let raw_forecast = dataset.forecasts.row(t, params.horizon);
    let shifted_forecast = crate::mrp::apply_safety_time(&raw_forecast, st);
    let t_s = params.seeding_window.min(params.horizon);
    let mut seeded = vec![0.0; h];
    for (i, slot) in seeded.iter_mut().enumerate().take(t_s as usize) {
        *slot = seeded_std.get(t + i as i64);
    }

    let mut inputs = ForwardInputs {
        params,
        shifted_forecast,
        raw_forecast,
        seeded_std: seeded,
        ssv: 0.0,
    };

    let mut trace = Vec::new();
    let mut last_bundle: Option<RealizationBundle> = None;
    for k in 0..cfg.max_iterations {
        let bundle = forward_simulate(&inputs, uset, cfg, ctx);
        let deficit = inventory_deficit(&bundle, cfg.slp, cfg.sl_min, scoring)?;
        trace.push(KIterationStep {
            iteration: k,
            ssv: inputs.ssv,
            deficit,
            slp_attained: attained_share(&bundle, cfg.sl_min, scoring)?,
        });
        if deficit == 0.0 {
            return Ok(KIterationOutcome {
                reorder: ReorderParams::new(inputs.ssv, st),
                bundle,
                converged: true,
                trace,
            });
        }
        inputs.ssv += deficit;
        last_bundle = Some(bundle);
    }
    log::warn!(
        "sku {}: lifting loop hit {} iterations at {} with ssv {:.3} still rising",
        ctx.sku,
        cfg.max_iterations,
        t,
        inputs.ssv
    );
    Ok(KIterationOutcome {
        reorder: ReorderParams::new(inputs.ssv, st),
        bundle: last_bundle.expect("max_iterations >= 1"),
        converged: false,
        trace,
    })
}

/// Write the per-iteration trace (`kiter_<sku>_<date>.csv` payload).
pub fn write_kiter_trace(path: &std::path::Path, trace: &[KIterationStep]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;
    let io_err = |e: csv::Error| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    };
    w.write_record(["iteration", "ssv", "h", "slp_attained"])
        .map_err(io_err)?;
    for s in trace {
        w.write_record([
            s.iteration.to_string(),
            s.ssv.to_string(),
            s.deficit.to_string(),
            s.slp_attained.to_string(),
        ])
        .map_err(io_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PlanningParams;
    use crate::uncertainty::{EmpiricalDistribution, UncertaintyKind, UncertaintySet};

    fn params(h: i64, lt: i64, elt: i64) -> PlanningParams {
        PlanningParams {
            sku_id: "OPT".into(),
            lead_time: lt,
            expedited_lead_time: elt,
            ptf: 0,
            moq: 0.0,
            rounding_value: 1.0,
            holding_cost: 1.0,
            order_cost: 0.0,
            target_sl: 1.0,
            horizon: h,
            seeding_window: lt,
        }
    }

    fn cfg(n_r: u32, slp: f64, sl_min: f64) -> ForwardSimConfig {
        ForwardSimConfig {
            n_realizations: n_r,
            slp,
            stp: 0.0,
            sl_min,
            max_iterations: 10,
            aggregation_percentile: 0.5,
        }
    }

    fn point_set(mm: f64, sq: f64, st: f64, df: f64) -> UncertaintySet {
        let d = |kind, v: f64| EmpiricalDistribution::new(kind, vec![v]).unwrap();
        UncertaintySet {
            u_mm: d(UncertaintyKind::Movement, mm),
            u_sq: d(UncertaintyKind::SupplierQuantity, sq),
            u_st: d(UncertaintyKind::SupplierTime, st),
            u_df: d(UncertaintyKind::DemandForecast, df),
            usw: DayRange::new(Day(-30), Day(0)),
        }
    }

    fn ctx() -> SamplingContext<'static> {
        SamplingContext {
            seed: 7,
            sku: "OPT",
            sampling_time: Day(0),
        }
    }

    fn bundle_from(paths: Vec<Vec<f64>>) -> RealizationBundle {
        let h = paths[0].len();
        let start = Day(0);
        let trajectories = paths
            .into_iter()
            .map(|inv| {
                let n = inv.len() as i64;
                Trajectory::new(
                    DailySeries::new(start, inv),
                    DailySeries::zeros(start, n),
                    DailySeries::zeros(start, n),
                    DailySeries::zeros(start, n),
                )
            })
            .collect();
        RealizationBundle {
            base: run_mrp(&MrpInput {
                starting_inventory: 0.0,
                forecast: vec![0.0; h],
                std_arrivals: vec![0.0; h],
                exp_arrivals: vec![0.0; h],
                params: params(h as i64, 1, 0),
                ssv: 0.0,
            }),
            trajectories,
            start,
            seeded_arrivals: DailySeries::zeros(start, 1),
        }
    }

    fn flat_dataset(h: i64, lt: i64, consumption: f64) -> SkuDataset {
        use crate::ingest::{ForecastMatrix, OrderLedger};
        let span = DayRange::new(Day(-60), Day(0));
        let n = span.len();
        let mut forecasts = ForecastMatrix::new(1);
        for origin in -60..1 {
            for i in 0..h {
                forecasts
                    .insert(Day(origin), Day(origin + i), consumption)
                    .unwrap();
            }
        }
        SkuDataset {
            params: params(h, lt, 1),
            actual_reorder: ReorderParams::ZERO,
            actual_inventory: DailySeries::zeros(span.start, n),
            actual_consumption: DailySeries::new(span.start, vec![consumption; n as usize]),
            misc_movements: DailySeries::zeros(span.start, n),
            blocked_movements: DailySeries::zeros(span.start, n),
            forecasts,
            orders: OrderLedger::default(),
            span,
        }
    }

    // --- steady state --------------------------------------------------------

    #[test]
    fn steady_state_rolls_to_ssv_at_lead_time() {
        let x0 = steady_state_x0(5.0, &[2.0, 2.0, 2.0], &[0.0, 0.0, 0.0], 3);
        assert_eq!(x0, 11.0);
        let mut x = x0;
        for fc in [2.0, 2.0, 2.0] {
            x -= fc;
        }
        assert_eq!(x, 5.0);
    }

    #[test]
    fn steady_state_zero_flows_is_ssv() {
        assert_eq!(steady_state_x0(7.5, &[0.0; 4], &[0.0; 4], 4), 7.5);
    }

    #[test]
    fn steady_state_can_go_negative_when_arrivals_exceed_demand() {
        let x0 = steady_state_x0(1.0, &[1.0, 1.0], &[10.0, 10.0], 2);
        assert_eq!(x0, -17.0);
    }

    // --- deficit ---------------------------------------------------------------

    #[test]
    fn deficit_is_depth_of_worst_day_at_full_service() {
        let b = bundle_from(vec![vec![3.0, -4.0, 1.0, 2.0, 5.0]]);
        let h = inventory_deficit(&b, 1.0, 1.0, DayRange::new(Day(0), Day(5))).unwrap();
        assert_eq!(h, 4.0);
    }

    #[test]
    fn deficit_zero_when_all_nonnegative() {
        let b = bundle_from(vec![vec![0.0, 1.0, 2.0], vec![5.0, 5.0, 5.0]]);
        let h = inventory_deficit(&b, 1.0, 1.0, DayRange::new(Day(0), Day(3))).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn deficit_allows_negative_days_below_target() {
        // sl_min = 0.8 over 5 days allows one negative day; the second-worst
        // value (-1) sets the lift.
        let b = bundle_from(vec![vec![-3.0, -1.0, 2.0, 2.0, 2.0]]);
        let h = inventory_deficit(&b, 1.0, 0.8, DayRange::new(Day(0), Day(5))).unwrap();
        assert_eq!(h, 1.0);
    }

    #[test]
    fn deficit_takes_slp_percentile_across_realizations() {
        let b = bundle_from(vec![
            vec![-1.0, 1.0],
            vec![-2.0, 1.0],
            vec![-3.0, 1.0],
            vec![-4.0, 1.0],
        ]);
        let w = DayRange::new(Day(0), Day(2));
        // lifts are {1,2,3,4}; nearest-rank: p=1.0 -> 4, p=0.5 -> 2, p=0.25 -> 1
        assert_eq!(inventory_deficit(&b, 1.0, 1.0, w).unwrap(), 4.0);
        assert_eq!(inventory_deficit(&b, 0.5, 1.0, w).unwrap(), 2.0);
        assert_eq!(inventory_deficit(&b, 0.25, 1.0, w).unwrap(), 1.0);
    }

    #[test]
    fn deficit_rejects_empty_window() {
        let b = bundle_from(vec![vec![1.0, 2.0]]);
        assert!(inventory_deficit(&b, 1.0, 1.0, DayRange::new(Day(1), Day(1))).is_err());
    }

    // --- forward simulation -------------------------------------------------------

    #[test]
    fn zero_uncertainty_realizations_equal_base_projection() {
        let ds = flat_dataset(12, 3, 2.0);
        let uset = point_set(0.0, 0.0, 0.0, 0.0);
        let inputs = ForwardInputs {
            params: &ds.params,
            shifted_forecast: vec![2.0; 12],
            raw_forecast: vec![2.0; 12],
            seeded_std: vec![0.0; 12],
            ssv: 0.0,
        };
        let bundle = forward_simulate(&inputs, &uset, &cfg(8, 1.0, 1.0), &ctx());
        for traj in &bundle.trajectories {
            for i in 0..12 {
                assert_eq!(
                    traj.inventory.get(Day(i)),
                    bundle.base.projected[i as usize]
                );
            }
        }
    }

    #[test]
    fn positive_df_residual_lifts_every_realization() {
        let ds = flat_dataset(12, 3, 2.0);
        let uset = point_set(0.0, 0.0, 0.0, 1.5);
        let inputs = ForwardInputs {
            params: &ds.params,
            shifted_forecast: vec![2.0; 12],
            raw_forecast: vec![2.0; 12],
            seeded_std: vec![0.0; 12],
            ssv: 0.0,
        };
        let bundle = forward_simulate(&inputs, &uset, &cfg(4, 1.0, 1.0), &ctx());
        for traj in &bundle.trajectories {
            for i in 1..12 {
                assert!(traj.inventory.get(Day(i)) >= bundle.base.projected[i as usize]);
            }
        }
    }

    #[test]
    fn constant_delay_shifts_every_arrival() {
        let ds = flat_dataset(12, 3, 0.0);
        let uset = point_set(0.0, 0.0, 2.0, 0.0);
        let mut seeded = vec![0.0; 12];
        seeded[1] = 5.0; // one seeded arrival on day 1
        let inputs = ForwardInputs {
            params: &ds.params,
            shifted_forecast: vec![0.0; 12],
            raw_forecast: vec![0.0; 12],
            seeded_std: seeded,
            ssv: 0.0,
        };
        let bundle = forward_simulate(&inputs, &uset, &cfg(3, 1.0, 1.0), &ctx());
        for traj in &bundle.trajectories {
            assert_eq!(traj.std_arrivals.get(Day(1)), 0.0);
            assert_eq!(traj.std_arrivals.get(Day(3)), 5.0);
        }
    }

    #[test]
    fn arrivals_pushed_past_horizon_are_dropped() {
        let ds = flat_dataset(6, 2, 0.0);
        let uset = point_set(0.0, 0.0, 10.0, 0.0);
        let mut seeded = vec![0.0; 6];
        seeded[1] = 5.0;
        let inputs = ForwardInputs {
            params: &ds.params,
            shifted_forecast: vec![0.0; 6],
            raw_forecast: vec![0.0; 6],
            seeded_std: seeded,
            ssv: 0.0,
        };
        let bundle = forward_simulate(&inputs, &uset, &cfg(2, 1.0, 1.0), &ctx());
        for traj in &bundle.trajectories {
            assert_eq!(traj.std_arrivals.values().iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn quantity_shortage_floors_at_zero() {
        let ds = flat_dataset(6, 2, 0.0);
        let uset = point_set(0.0, -100.0, 0.0, 0.0);
        let mut seeded = vec![0.0; 6];
        seeded[1] = 5.0;
        let inputs = ForwardInputs {
            params: &ds.params,
            shifted_forecast: vec![0.0; 6],
            raw_forecast: vec![0.0; 6],
            seeded_std: seeded,
            ssv: 0.0,
        };
        let bundle = forward_simulate(&inputs, &uset, &cfg(2, 1.0, 1.0), &ctx());
        for traj in &bundle.trajectories {
            assert!(traj.std_arrivals.values().iter().all(|&q| q == 0.0));
        }
    }

    // --- lifting loop ----------------------------------------------------------------

    #[test]
    fn zero_uncertainty_recommends_zero_in_one_iteration() {
        let ds = flat_dataset(12, 3, 2.0);
        let uset = point_set(0.0, 0.0, 0.0, 0.0);
        let out = k_iteration(
            &ds,
            Day(0),
            &uset,
            &cfg(16, 1.0, 1.0),
            &DailySeries::zeros(Day(0), 1),
            &ctx(),
        )
        .unwrap();
        assert!(out.converged);
        assert_eq!(out.reorder, ReorderParams::new(0.0, 0));
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn safety_time_follows_delay_percentile_regardless_of_lifting() {
        let ds = flat_dataset(30, 3, 0.0);
        let mut uset = point_set(0.0, 0.0, 0.0, 0.0);
        uset.u_st = EmpiricalDistribution::new(
            UncertaintyKind::SupplierTime,
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 6.0],
        )
        .unwrap();
        let mut c = cfg(8, 1.0, 1.0);
        c.stp = 1.0;
        let out = k_iteration(
            &ds,
            Day(0),
            &uset,
            &c,
            &DailySeries::zeros(Day(0), 1),
            &ctx(),
        )
        .unwrap();
        assert_eq!(out.reorder.st, 6);
    }

    #[test]
    fn persistent_under_forecast_forces_positive_ssv() {
        // Zero forecast but real consumption (all-negative DF residuals):
        // realizations drain, the loop must lift the SSV above zero.
        let mut ds = flat_dataset(12, 3, 2.0);
        ds.forecasts = crate::ingest::ForecastMatrix::new(1);
        let uset = point_set(0.0, 0.0, 0.0, -2.0);
        let out = k_iteration(
            &ds,
            Day(0),
            &uset,
            &cfg(8, 1.0, 1.0),
            &DailySeries::zeros(Day(0), 1),
            &ctx(),
        )
        .unwrap();
        assert!(out.converged);
        assert!(out.reorder.ssv > 0.0);
    }

    #[test]
    fn stop_condition_matches_explicit_service_level_check() {
        let mut ds = flat_dataset(14, 3, 3.0);
        ds.forecasts = crate::ingest::ForecastMatrix::new(1);
        let uset = point_set(0.5, 0.0, 0.0, -1.0);
        let c = cfg(32, 0.8, 0.9);
        let out = k_iteration(
            &ds,
            Day(0),
            &uset,
            &c,
            &DailySeries::zeros(Day(0), 1),
            &ctx(),
        )
        .unwrap();
        assert!(out.converged);
        let scoring = scoring_window(&ds.params, out.reorder.st, Day(0)).unwrap();
        let sls: Vec<f64> = out
            .bundle
            .trajectories
            .iter()
            .map(|t| crate::domain::service_level(t, scoring).unwrap())
            .collect();
        let attained = percentile_of(&sls, c.slp);
        assert!(
            attained >= c.sl_min - 1e-12,
            "stop condition violated: {attained} < {}",
            c.sl_min
        );
    }

    #[test]
    fn ssv_sequence_strictly_increases_until_stop() {
        let mut ds = flat_dataset(12, 3, 2.0);
        ds.forecasts = crate::ingest::ForecastMatrix::new(1);
        let uset = point_set(0.0, 0.0, 0.0, -2.0);
        let out = k_iteration(
            &ds,
            Day(0),
            &uset,
            &cfg(8, 1.0, 1.0),
            &DailySeries::zeros(Day(0), 1),
            &ctx(),
        )
        .unwrap();
        for pair in out.trace.windows(2) {
            assert!(pair[1].ssv > pair[0].ssv);
        }
    }
}
