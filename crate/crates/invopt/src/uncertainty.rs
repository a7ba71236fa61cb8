//! Empirical uncertainty distributions sampled from history.
//!
//! Four residual distributions are built from an uncertainty sampling
//! window (USW) of the historical data:
//!
//! * movement (`MM`) — daily miscellaneous + blocked movement flows;
//! * supplier quantity (`SQ`) — delivered-minus-planned order quantity,
//!   positive surprises mapped to 0 (only shortages count);
//! * supplier time (`ST`) — actual-minus-planned delivery delay in days,
//!   early deliveries mapped to 0 (only delays count);
//! * demand forecast (`DF`) — the lagged forecast, outlier-clipped and
//!   cadence-smoothed, minus the actual consumption.
//!
//! Samples are equally likely; draws resample with replacement from a
//! seeded stream, and percentiles use the nearest-rank convention.

use std::path::Path;

use rand::Rng;

use crate::domain::{DailySeries, Day, DayRange};
use crate::ingest::{ForecastMatrix, OrderLedger, SkuDataset};
use crate::{Error, Result};

/// Guard on `ceil(p * n)` so a one-ulp overshoot in the product cannot
/// spill the nearest-rank index to the next order statistic.
const PCT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UncertaintyKind {
    Movement,
    SupplierQuantity,
    SupplierTime,
    DemandForecast,
}

impl UncertaintyKind {
    pub fn label(self) -> &'static str {
        match self {
            UncertaintyKind::Movement => "MM",
            UncertaintyKind::SupplierQuantity => "SQ",
            UncertaintyKind::SupplierTime => "ST",
            UncertaintyKind::DemandForecast => "DF",
        }
    }
}

/// A finite multiset of historical residual samples, all equally likely.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    kind: UncertaintyKind,
    samples: Vec<f64>,
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(kind: UncertaintyKind, samples: Vec<f64>) -> Result<EmpiricalDistribution> {
        if samples.is_empty() {
            return Err(Error::EmptyDistribution(format!(
                "{} distribution has no samples",
                kind.label()
            )));
        }
        debug_assert!(match kind {
            UncertaintyKind::SupplierQuantity => samples.iter().all(|&s| s <= 0.0),
            UncertaintyKind::SupplierTime =>
                samples.iter().all(|&s| s >= 0.0 && s == s.round()),
            _ => true,
        });
        let mut sorted = samples.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EmpiricalDistribution {
            kind,
            samples,
            sorted,
        })
    }

    /// Degenerate single-sample distribution at zero, used when a window
    /// contains no qualifying observations.
    pub fn degenerate_zero(kind: UncertaintyKind) -> EmpiricalDistribution {
        EmpiricalDistribution::new(kind, vec![0.0]).unwrap()
    }

    pub fn kind(&self) -> UncertaintyKind {
        self.kind
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    /// Nearest-rank percentile: the value at 1-based index `ceil(p * n)` of
    /// the sorted samples; `p = 0` returns the minimum.
    pub fn percentile(&self, p: f64) -> f64 {
        assert!((0.0..=1.0).contains(&p), "percentile p={p} outside [0,1]");
        nearest_rank(&self.sorted, p)
    }

    /// One uniform draw with replacement.
    pub fn draw(&self, rng: &mut impl Rng) -> f64 {
        self.samples[rng.random_range(0..self.samples.len())]
    }
}

/// Nearest-rank percentile of an already sorted slice.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let n = sorted.len();
    let rank = (p * n as f64 - PCT_EPS).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

/// Nearest-rank percentile of an unsorted slice.
pub fn percentile_of(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nearest_rank(&sorted, p)
}

/// The four distributions built from one sampling window.
#[derive(Debug, Clone)]
pub struct UncertaintySet {
    pub u_mm: EmpiricalDistribution,
    pub u_sq: EmpiricalDistribution,
    pub u_st: EmpiricalDistribution,
    pub u_df: EmpiricalDistribution,
    pub usw: DayRange,
}

/// How the uncertainty sampling window evolves over a simulation period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UswMode {
    /// Training: the window is the whole period, at every sampling time.
    Training,
    /// Validation / live: a growing window ending at the sampling time,
    /// with its start fixed so the initial length is
    /// `max(l_min, lead_time + b_usw)`.
    Validation,
}

/// Initial USW length: `max(l_min, lead_time + b_usw)`.
pub fn initial_usw_len(lead_time: i64, b_usw: i64, l_min: i64) -> i64 {
    l_min.max(lead_time + b_usw)
}

/// The sampling window for sampling time `t` within `period`.
pub fn usw_window(
    t: Day,
    period: DayRange,
    lead_time: i64,
    b_usw: i64,
    l_min: i64,
    mode: UswMode,
) -> Result<DayRange> {
    let window = match mode {
        UswMode::Training => period,
        UswMode::Validation => {
            let start = period.start - initial_usw_len(lead_time, b_usw, l_min);
            DayRange::new(start, t)
        }
    };
    if window.is_empty() {
        return Err(Error::Config(format!(
            "empty uncertainty sampling window {window} at sampling time {t}"
        )));
    }
    Ok(window)
}

/// One-sided outlier clip: values above `median + n * sigma` (sample
/// standard deviation) are replaced by the threshold; everything else,
/// including the whole lower tail, passes through. Inputs with fewer than
/// two samples are returned unchanged (sigma undefined).
pub fn clip_upper(values: &[f64], n: f64) -> Vec<f64> {
    assert!(n > 0.0, "clip multiplier must be positive");
    if values.len() < 2 {
        return values.to_vec();
    }
    let median = median_of(values);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    let threshold = median + n * var.sqrt();
    values
        .iter()
        .map(|&v| if v > threshold { threshold } else { v })
        .collect()
}

fn median_of(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Clip a demand-forecast series (the `n_c` clip).
pub fn clip_df(series: &DailySeries, n_c: f64) -> DailySeries {
    DailySeries::new(series.start(), clip_upper(series.values(), n_c))
}

/// Clip residual samples (the `n_u` clip).
pub fn clip_residuals(samples: &[f64], n_u: f64) -> Vec<f64> {
    clip_upper(samples, n_u)
}

/// Movement uncertainty: one sample per window day, the sum of
/// miscellaneous and blocked movement flows, upper-clipped with `n_u`.
pub fn build_u_mm(dataset: &SkuDataset, usw: DayRange, n_u: f64) -> Result<EmpiricalDistribution> {
    let misc = dataset.misc_movements.slice(usw)?;
    let blocked = dataset.blocked_movements.slice(usw)?;
    let raw: Vec<f64> = misc.iter().zip(blocked).map(|(a, b)| a + b).collect();
    EmpiricalDistribution::new(UncertaintyKind::Movement, clip_residuals(&raw, n_u))
}

/// Supplier quantity uncertainty: `min(actual - planned, 0)` per order
/// planned to arrive in the window with actuals recorded. Over-deliveries
/// are a favorable condition and map to 0.
pub fn build_u_sq(ledger: &OrderLedger, usw: DayRange) -> EmpiricalDistribution {
    let samples: Vec<f64> = ledger
        .delivered_in(usw)
        .map(|o| (o.actual_qty.unwrap() - o.planned_qty).min(0.0))
        .collect();
    if samples.is_empty() {
        log::warn!("no delivered orders in USW {usw}; SQ uncertainty degenerates to {{0}}");
        return EmpiricalDistribution::degenerate_zero(UncertaintyKind::SupplierQuantity);
    }
    EmpiricalDistribution::new(UncertaintyKind::SupplierQuantity, samples).unwrap()
}

/// Supplier time uncertainty: `max(actual - planned, 0)` days per order
/// planned to arrive in the window with actuals recorded. Early deliveries
/// map to 0.
pub fn build_u_st(ledger: &OrderLedger, usw: DayRange) -> EmpiricalDistribution {
    let samples: Vec<f64> = ledger
        .delivered_in(usw)
        .map(|o| ((o.actual_date.unwrap() - o.planned_date).max(0)) as f64)
        .collect();
    if samples.is_empty() {
        log::warn!("no delivered orders in USW {usw}; ST uncertainty degenerates to {{0}}");
        return EmpiricalDistribution::degenerate_zero(UncertaintyKind::SupplierTime);
    }
    EmpiricalDistribution::new(UncertaintyKind::SupplierTime, samples).unwrap()
}

/// One-dimensional view of the forecast matrix over the window: for each
/// window day `tau`, the forecast for `tau` made `lead_time + st` days
/// earlier (the off-diagonal of the 2D matrix). Missing origins fall back
/// to the nearest earlier origin carrying the target; fully absent entries
/// read as 0.
pub fn extract_df_1d(
    forecasts: &ForecastMatrix,
    usw: DayRange,
    lead_time: i64,
    st: i64,
) -> DailySeries {
    let lag = lead_time + st;
    let values: Vec<f64> = usw.days().map(|tau| forecasts.value_at(tau - lag, tau)).collect();
    DailySeries::new(usw.start, values)
}

/// Cadence smoothing: centered moving average with window
/// `[i - d/2, i + d/2]`, truncated at the series boundaries and
/// renormalized by the actual window size.
pub fn smooth_df(series: &DailySeries, cadence: i64) -> DailySeries {
    assert!(cadence >= 1, "cadence must be >= 1");
    let half = (cadence / 2) as usize;
    let v = series.values();
    if half == 0 || v.is_empty() {
        return series.clone();
    }
    let n = v.len();
    let smoothed: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let window = &v[lo..=hi];
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect();
    DailySeries::new(series.start(), smoothed)
}

/// Demand forecast uncertainty: extract the lagged 1D forecast, clip it
/// (`n_c`), smooth it to daily cadence, subtract actual consumption, and
/// clip the residuals (`n_u`). Positive samples mean over-forecast.
pub fn build_u_df(
    dataset: &SkuDataset,
    usw: DayRange,
    lead_time: i64,
    st: i64,
    cadence: i64,
    n_c: f64,
    n_u: f64,
) -> Result<EmpiricalDistribution> {
    let extracted = extract_df_1d(&dataset.forecasts, usw, lead_time, st);
    let clipped = clip_df(&extracted, n_c);
    let smoothed = smooth_df(&clipped, cadence);
    let actual = dataset.actual_consumption.slice(usw)?;
    let residuals: Vec<f64> = smoothed
        .values()
        .iter()
        .zip(actual)
        .map(|(f, a)| f - a)
        .collect();
    EmpiricalDistribution::new(
        UncertaintyKind::DemandForecast,
        clip_residuals(&residuals, n_u),
    )
}

/// Build the four distributions from one window. The safety time used for
/// the forecast lag is derived first, from the supplier-time distribution
/// at `stp`.
pub fn build_uncertainty_set(
    dataset: &SkuDataset,
    usw: DayRange,
    stp: f64,
    n_c: f64,
    n_u: f64,
) -> Result<UncertaintySet> {
    let u_st = build_u_st(&dataset.orders, usw);
    let st = u_st.percentile(stp).round() as i64;
    let u_df = build_u_df(
        dataset,
        usw,
        dataset.params.lead_time,
        st,
        dataset.forecasts.cadence,
        n_c,
        n_u,
    )?;
    Ok(UncertaintySet {
        u_mm: build_u_mm(dataset, usw, n_u)?,
        u_sq: build_u_sq(&dataset.orders, usw),
        u_st,
        u_df,
        usw,
    })
}

/// Diagnostic dump of every sample, one `(kind, sample)` row per line.
pub fn write_diagnostics(path: &Path, set: &UncertaintySet) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;
    let io_err = |e: csv::Error| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    };
    w.write_record(["kind", "sample"]).map_err(io_err)?;
    for dist in [&set.u_df, &set.u_mm, &set.u_st, &set.u_sq] {
        for &s in dist.samples() {
            w.write_record([dist.kind().label().to_string(), s.to_string()])
                .map_err(io_err)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Order;
    use crate::rng::{Purpose, StreamKey};
    use proptest::prelude::*;

    fn dist(kind: UncertaintyKind, samples: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::new(kind, samples.to_vec()).unwrap()
    }

    fn order(id: &str, planned: i64, pq: f64, actual: Option<(i64, f64)>) -> Order {
        Order {
            id: id.into(),
            planned_date: Day(planned),
            planned_qty: pq,
            actual_date: actual.map(|(d, _)| Day(d)),
            actual_qty: actual.map(|(_, q)| q),
        }
    }

    // --- USW -----------------------------------------------------------------

    #[test]
    fn initial_usw_length_follows_max_rule() {
        assert_eq!(initial_usw_len(6, 14, 30), 30);
        assert_eq!(initial_usw_len(30, 14, 30), 44);
    }

    #[test]
    fn validation_window_grows_with_fixed_start() {
        let period = DayRange::new(Day(100), Day(200));
        let w0 = usw_window(Day(100), period, 6, 14, 30, UswMode::Validation).unwrap();
        assert_eq!(w0, DayRange::new(Day(70), Day(100)));
        assert_eq!(w0.len(), 30);
        let w1 = usw_window(Day(130), period, 6, 14, 30, UswMode::Validation).unwrap();
        assert_eq!(w1.start, w0.start);
        assert_eq!(w1.len(), 60);
    }

    #[test]
    fn training_window_is_the_whole_period() {
        let period = DayRange::new(Day(0), Day(90));
        let w = usw_window(Day(30), period, 6, 14, 30, UswMode::Training).unwrap();
        assert_eq!(w, period);
    }

    #[test]
    fn empty_window_is_a_config_error() {
        let period = DayRange::new(Day(0), Day(0));
        assert!(usw_window(Day(0), period, 6, 14, 30, UswMode::Training).is_err());
    }

    // --- percentile and draw ---------------------------------------------------

    #[test]
    fn percentile_nearest_rank_matches_worked_delays() {
        let delays = dist(UncertaintyKind::SupplierTime, &[0.0, 1.0, 3.0, 3.0, 5.0, 6.0]);
        assert_eq!(delays.percentile(0.5), 3.0);
        assert_eq!(delays.percentile(1.0), 6.0);
        assert_eq!(delays.percentile(0.0), 0.0);
    }

    #[test]
    fn percentile_single_sample_is_constant() {
        let d = dist(UncertaintyKind::Movement, &[7.0]);
        for p in [0.0, 0.3, 0.5, 0.925, 1.0] {
            assert_eq!(d.percentile(p), 7.0);
        }
    }

    #[test]
    fn percentile_index_does_not_spill_on_float_noise() {
        // 0.925 * 40 lands a hair above 37.0 in f64; rank must stay 37.
        let samples: Vec<f64> = (1..=40).map(|i| i as f64).collect();
        let d = dist(UncertaintyKind::Movement, &samples);
        assert_eq!(d.percentile(0.925), 37.0);
    }

    #[test]
    fn empty_distribution_is_rejected() {
        assert!(EmpiricalDistribution::new(UncertaintyKind::Movement, vec![]).is_err());
    }

    #[test]
    fn draws_are_reproducible_per_key() {
        let d = dist(UncertaintyKind::DemandForecast, &[1.0, 2.0, 3.0, 4.0]);
        let draw_seq = |seed: u64| -> Vec<f64> {
            let mut rng = StreamKey {
                seed,
                sku: "S",
                sampling_time: Day(0),
                realization: 0,
                purpose: Purpose::DemandForecast,
            }
            .rng();
            (0..32).map(|_| d.draw(&mut rng)).collect()
        };
        assert_eq!(draw_seq(9), draw_seq(9));
        assert_ne!(draw_seq(9), draw_seq(10));
    }

    #[test]
    fn single_sample_always_drawn() {
        let d = dist(UncertaintyKind::SupplierTime, &[4.0]);
        let mut rng = StreamKey {
            seed: 1,
            sku: "S",
            sampling_time: Day(0),
            realization: 0,
            purpose: Purpose::StdDelay,
        }
        .rng();
        for _ in 0..16 {
            assert_eq!(d.draw(&mut rng), 4.0);
        }
    }

    #[test]
    fn draw_frequencies_match_uniform_within_binomial_bound() {
        let samples = [10.0, 20.0, 30.0, 40.0, 50.0];
        let d = dist(UncertaintyKind::Movement, &samples);
        let n_draws = 50_000usize;
        let mut rng = StreamKey {
            seed: 42,
            sku: "S",
            sampling_time: Day(0),
            realization: 0,
            purpose: Purpose::Movement,
        }
        .rng();
        let mut counts = std::collections::HashMap::new();
        for _ in 0..n_draws {
            *counts.entry(d.draw(&mut rng) as i64).or_insert(0usize) += 1;
        }
        let p = 1.0 / samples.len() as f64;
        let sigma = (n_draws as f64 * p * (1.0 - p)).sqrt();
        for &s in &samples {
            let observed = counts[&(s as i64)] as f64;
            assert!(
                (observed - n_draws as f64 * p).abs() <= 3.0 * sigma,
                "frequency of {s} off: {observed}"
            );
        }
    }

    // --- clipping ---------------------------------------------------------------

    #[test]
    fn clip_leaves_equal_values_unchanged() {
        assert_eq!(clip_upper(&[4.0, 4.0, 4.0], 1.0), vec![4.0, 4.0, 4.0]);
    }

    #[test]
    fn clip_spike_to_median_plus_sigma() {
        // median 0, sample sigma 50: threshold 50 at n=1.
        assert_eq!(
            clip_upper(&[0.0, 0.0, 0.0, 100.0], 1.0),
            vec![0.0, 0.0, 0.0, 50.0]
        );
    }

    #[test]
    fn clip_threshold_arithmetic_on_mixed_series() {
        // [1,2,3,100]: median 2.5, sample variance 7205/3. At n=5 the
        // threshold (~247.5) exceeds the spike, so nothing clips; at n=1
        // the spike is pulled down to the threshold.
        let relaxed = clip_upper(&[1.0, 2.0, 3.0, 100.0], 5.0);
        assert_eq!(relaxed, vec![1.0, 2.0, 3.0, 100.0]);

        let strict = clip_upper(&[1.0, 2.0, 3.0, 100.0], 1.0);
        let expected = 2.5 + (7205.0_f64 / 3.0).sqrt();
        assert_eq!(&strict[..3], &[1.0, 2.0, 3.0]);
        assert!((strict[3] - expected).abs() < 1e-12);
    }

    #[test]
    fn clip_single_sample_passes_through() {
        assert_eq!(clip_upper(&[123.0], 1.0), vec![123.0]);
    }

    // --- builders -----------------------------------------------------------------

    fn tiny_dataset(
        consumption: Vec<f64>,
        misc: Vec<f64>,
        blocked: Vec<f64>,
        forecast_of: impl Fn(Day, Day) -> f64,
        orders: Vec<Order>,
    ) -> SkuDataset {
        use crate::domain::PlanningParams;
        let n = consumption.len() as i64;
        let span = DayRange::new(Day(0), Day(n));
        let mut forecasts = ForecastMatrix::new(1);
        for origin in -40..n {
            for target in origin.max(0)..n {
                forecasts
                    .insert(Day(origin), Day(target), forecast_of(Day(origin), Day(target)))
                    .unwrap();
            }
        }
        SkuDataset {
            params: PlanningParams {
                sku_id: "T".into(),
                lead_time: 3,
                expedited_lead_time: 1,
                ptf: 1,
                moq: 0.0,
                rounding_value: 1.0,
                holding_cost: 1.0,
                order_cost: 0.0,
                target_sl: 0.95,
                horizon: 10,
                seeding_window: 3,
            },
            actual_reorder: crate::domain::ReorderParams::ZERO,
            actual_inventory: DailySeries::zeros(Day(0), n),
            actual_consumption: DailySeries::new(Day(0), consumption),
            misc_movements: DailySeries::new(Day(0), misc),
            blocked_movements: DailySeries::new(Day(0), blocked),
            forecasts,
            orders: OrderLedger { orders },
            span,
        }
    }

    #[test]
    fn movement_samples_sum_misc_and_blocked() {
        let ds = tiny_dataset(
            vec![0.0, 0.0],
            vec![1.0, -2.0],
            vec![0.0, -1.0],
            |_, _| 0.0,
            vec![],
        );
        let u = build_u_mm(&ds, ds.span, 100.0).unwrap();
        assert_eq!(u.samples(), &[1.0, -3.0]);
    }

    #[test]
    fn movement_all_zero_stays_zero() {
        let ds = tiny_dataset(vec![0.0; 4], vec![0.0; 4], vec![0.0; 4], |_, _| 0.0, vec![]);
        let u = build_u_mm(&ds, ds.span, 1.0).unwrap();
        assert!(u.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn supplier_quantity_keeps_only_shortages() {
        let ledger = OrderLedger {
            orders: vec![
                order("a", 1, 10.0, Some((1, 7.0))),   // shortage -3
                order("b", 2, 10.0, Some((2, 12.0))),  // over-delivery -> 0
                order("c", 3, 10.0, Some((3, 10.0))),  // exact -> 0
                order("d", 4, 10.0, None),             // pending: not a sample
            ],
        };
        let u = build_u_sq(&ledger, DayRange::new(Day(0), Day(10)));
        assert_eq!(u.samples(), &[-3.0, 0.0, 0.0]);
    }

    #[test]
    fn supplier_time_keeps_only_delays() {
        let ledger = OrderLedger {
            orders: vec![
                order("a", 10, 5.0, Some((13, 5.0))), // 3 days late
                order("b", 11, 5.0, Some((9, 5.0))),  // early -> 0
                order("c", 12, 5.0, Some((12, 5.0))), // on time -> 0
            ],
        };
        let u = build_u_st(&ledger, DayRange::new(Day(0), Day(20)));
        assert_eq!(u.samples(), &[3.0, 0.0, 0.0]);
    }

    #[test]
    fn no_qualifying_orders_degenerates_to_zero() {
        let ledger = OrderLedger { orders: vec![] };
        let sq = build_u_sq(&ledger, DayRange::new(Day(0), Day(5)));
        assert_eq!(sq.samples(), &[0.0]);
        let st = build_u_st(&ledger, DayRange::new(Day(0), Day(5)));
        assert_eq!(st.samples(), &[0.0]);
    }

    #[test]
    fn extract_reads_the_lagged_off_diagonal() {
        // forecast value encodes its (origin, target) pair so the lag is visible
        let ds = tiny_dataset(
            vec![0.0; 8],
            vec![0.0; 8],
            vec![0.0; 8],
            |o, t| (1000 + o.ordinal() * 10 + t.ordinal()) as f64,
            vec![],
        );
        let s = extract_df_1d(&ds.forecasts, DayRange::new(Day(4), Day(6)), 3, 1);
        // tau=4 -> origin 0; tau=5 -> origin 1
        assert_eq!(s.values(), &[1004.0, 1015.0]);
    }

    #[test]
    fn extract_lag_in_calendar_terms() {
        let tau = Day::from_iso("2020-04-01").unwrap();
        let origin = tau - (6 + 0);
        assert_eq!(origin.to_string(), "2020-03-26");
    }

    #[test]
    fn extract_constant_matrix_gives_constant_series() {
        let ds = tiny_dataset(vec![0.0; 8], vec![0.0; 8], vec![0.0; 8], |_, _| 5.5, vec![]);
        let s = extract_df_1d(&ds.forecasts, ds.span, 3, 2);
        assert!(s.values().iter().all(|&v| v == 5.5));
    }

    #[test]
    fn smoothing_identity_at_cadence_one() {
        let s = DailySeries::new(Day(0), vec![1.0, 9.0, 4.0]);
        assert_eq!(smooth_df(&s, 1), s);
    }

    #[test]
    fn smoothing_three_day_window_at_cadence_two() {
        let s = DailySeries::new(Day(0), vec![0.0, 6.0, 0.0]);
        let out = smooth_df(&s, 2);
        // interior: mean(0,6,0) = 2; edges renormalize over two points
        assert_eq!(out.values(), &[3.0, 2.0, 3.0]);
    }

    #[test]
    fn smoothing_constant_series_unchanged() {
        let s = DailySeries::new(Day(0), vec![4.0; 10]);
        for d in [1, 2, 3, 7, 30] {
            assert_eq!(smooth_df(&s, d), s);
        }
    }

    #[test]
    fn df_uncertainty_zero_when_forecast_equals_actual() {
        let consumption: Vec<f64> = (0..10).map(|i| 3.0 + (i % 3) as f64).collect();
        let c = consumption.clone();
        let ds = tiny_dataset(
            consumption,
            vec![0.0; 10],
            vec![0.0; 10],
            move |_, t| {
                if (0..10).contains(&t.ordinal()) {
                    c[t.ordinal() as usize]
                } else {
                    0.0
                }
            },
            vec![],
        );
        let u = build_u_df(&ds, ds.span, 3, 0, 1, 5.0, 1.0).unwrap();
        assert!(u.samples().iter().all(|&s| s == 0.0), "{:?}", u.samples());
    }

    #[test]
    fn df_uncertainty_sign_tracks_forecast_bias() {
        // persistent over-forecast -> positive samples
        let ds = tiny_dataset(
            vec![2.0; 10],
            vec![0.0; 10],
            vec![0.0; 10],
            |_, _| 5.0,
            vec![],
        );
        let u = build_u_df(&ds, ds.span, 3, 0, 1, 5.0, 10.0).unwrap();
        assert!(u.samples().iter().all(|&s| s > 0.0));

        // zero forecast, positive consumption -> negative samples
        let ds = tiny_dataset(
            vec![2.0; 10],
            vec![0.0; 10],
            vec![0.0; 10],
            |_, _| 0.0,
            vec![],
        );
        let u = build_u_df(&ds, ds.span, 3, 0, 1, 5.0, 1.0).unwrap();
        assert!(u.samples().iter().all(|&s| s < 0.0));
    }

    // --- properties -----------------------------------------------------------------

    proptest! {
        #[test]
        fn clip_never_increases_and_keeps_low_values(
            values in proptest::collection::vec(-100.0_f64..100.0, 2..50),
            n in 0.1_f64..10.0,
        ) {
            let out = clip_upper(&values, n);
            let median = median_of(&values);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
            let threshold = median + n * var.sqrt();
            for (&a, &b) in out.iter().zip(&values) {
                prop_assert!(a <= b);
                if b <= threshold {
                    prop_assert_eq!(a, b);
                }
            }
        }

        #[test]
        fn percentile_is_monotone_in_p(
            samples in proptest::collection::vec(-50.0_f64..50.0, 1..40),
            p1 in 0.0_f64..=1.0,
            p2 in 0.0_f64..=1.0,
        ) {
            let d = EmpiricalDistribution::new(UncertaintyKind::Movement, samples).unwrap();
            let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
            prop_assert!(d.percentile(lo) <= d.percentile(hi));
        }

        #[test]
        fn sq_nonpositive_st_nonnegative(
            specs in proptest::collection::vec((0_i64..30, 1.0_f64..20.0, 0_i64..5, -4.0_f64..4.0), 1..20)
        ) {
            let orders: Vec<Order> = specs.iter().enumerate().map(|(i, &(day, qty, delay, dq))| {
                order(&format!("o{i}"), day, qty, Some((day + delay, (qty + dq).max(0.1))))
            }).collect();
            let ledger = OrderLedger { orders };
            let usw = DayRange::new(Day(0), Day(30));
            let sq = build_u_sq(&ledger, usw);
            prop_assert!(sq.samples().iter().all(|&s| s <= 0.0));
            let st = build_u_st(&ledger, usw);
            prop_assert!(st.samples().iter().all(|&s| s >= 0.0 && s == s.round()));
        }

        #[test]
        fn smoothing_preserves_the_mean_of_constant_padding(
            len in 3_usize..30,
            value in 0.0_f64..50.0,
            cadence in 1_i64..10,
        ) {
            let s = DailySeries::new(Day(0), vec![value; len]);
            let out = smooth_df(&s, cadence);
            for &v in out.values() {
                prop_assert!((v - value).abs() < 1e-9);
            }
        }
    }
}
