//! Calendar-indexed domain types shared by every other module.
//!
//! Everything operates on a daily grid: a [`Day`] is an integer ordinal,
//! a [`DailySeries`] is a dense vector of quantities anchored at a day,
//! and a [`Trajectory`] bundles the four series that describe one simulated
//! inventory path. All types are immutable values after construction.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Sub};

use crate::{Error, Result};

/// One calendar day, stored as the number of days since 1970-01-01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Day(pub i64);

impl Day {
    /// Parse an ISO-8601 date (`YYYY-MM-DD`).
    pub fn from_iso(s: &str) -> Result<Day> {
        let date = s
            .parse::<NaiveDate>()
            .map_err(|e| Error::Config(format!("invalid date {s:?}: {e}")))?;
        let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).unwrap();
        Ok(Day((date - epoch).num_days()))
    }

    pub fn ordinal(self) -> i64 {
        self.0
    }

    fn to_date(self) -> NaiveDate {
        let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).unwrap();
        epoch + chrono::Days::new(0) + chrono::Duration::days(self.0)
    }
}

impl fmt::Display for Day {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_date().format("%Y-%m-%d"))
    }
}

impl Add<i64> for Day {
    type Output = Day;
    fn add(self, days: i64) -> Day {
        Day(self.0 + days)
    }
}

impl Sub<i64> for Day {
    type Output = Day;
    fn sub(self, days: i64) -> Day {
        Day(self.0 - days)
    }
}

impl Sub<Day> for Day {
    type Output = i64;
    fn sub(self, other: Day) -> i64 {
        self.0 - other.0
    }
}

/// Half-open day interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayRange {
    pub start: Day,
    pub end: Day,
}

impl DayRange {
    pub fn new(start: Day, end: Day) -> DayRange {
        DayRange { start, end }
    }

    pub fn len(&self) -> i64 {
        (self.end - self.start).max(0)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, day: Day) -> bool {
        day >= self.start && day < self.end
    }

    pub fn contains_range(&self, other: &DayRange) -> bool {
        other.start >= self.start && other.end <= self.end
    }

    pub fn days(&self) -> impl Iterator<Item = Day> {
        (self.start.0..self.end.0).map(Day)
    }
}

impl fmt::Display for DayRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// Static per-SKU planning data consumed by the MRP and the optimizer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanningParams {
    pub sku_id: String,
    /// Days from order placement to standard arrival.
    pub lead_time: i64,
    /// Days from order placement to expedited arrival.
    pub expedited_lead_time: i64,
    /// Planning time fence: existing orders inside it cannot be cancelled.
    pub ptf: i64,
    /// Minimum order quantity.
    pub moq: f64,
    /// Lot increment; placed quantities are moq + k * rounding_value.
    pub rounding_value: f64,
    /// Holding cost per unit per day.
    pub holding_cost: f64,
    /// Cost charged per placed order (default 0).
    pub order_cost: f64,
    /// Minimum target service level in [0, 1].
    pub target_sl: f64,
    /// Planning horizon in days.
    pub horizon: i64,
    /// Seeding window length for the forward-looking simulation; defaults
    /// to the lead time.
    pub seeding_window: i64,
}

impl PlanningParams {
    /// Check the cross-field invariants (ELT <= LT <= H, RV > 0, ...).
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| {
            Err(Error::Validation {
                sku: self.sku_id.clone(),
                message: msg,
            })
        };
        if self.lead_time <= 0 {
            return fail(format!("lead_time must be > 0, got {}", self.lead_time));
        }
        if self.expedited_lead_time < 0 || self.expedited_lead_time > self.lead_time {
            return fail(format!(
                "expedited_lead_time must satisfy 0 <= ELT <= LT, got ELT={} LT={}",
                self.expedited_lead_time, self.lead_time
            ));
        }
        if self.lead_time > self.horizon {
            return fail(format!(
                "lead_time {} exceeds horizon {}",
                self.lead_time, self.horizon
            ));
        }
        if self.seeding_window > self.horizon {
            return fail(format!(
                "seeding_window {} exceeds horizon {}",
                self.seeding_window, self.horizon
            ));
        }
        if self.ptf < 0 {
            return fail(format!("ptf must be >= 0, got {}", self.ptf));
        }
        if self.moq < 0.0 {
            return fail(format!("moq must be >= 0, got {}", self.moq));
        }
        if !(self.rounding_value > 0.0) {
            return fail(format!(
                "rounding_value must be > 0, got {}",
                self.rounding_value
            ));
        }
        if self.holding_cost < 0.0 || self.order_cost < 0.0 {
            return fail("costs must be >= 0".to_string());
        }
        if !(0.0..=1.0).contains(&self.target_sl) {
            return fail(format!("target_sl must be in [0,1], got {}", self.target_sl));
        }
        if self.horizon <= 0 {
            return fail(format!("horizon must be > 0, got {}", self.horizon));
        }
        Ok(())
    }
}

/// A reorder-parameter pair: safety stock value and safety time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReorderParams {
    /// Safety stock value (quantity, >= 0).
    pub ssv: f64,
    /// Safety time (days, >= 0).
    pub st: i64,
}

impl ReorderParams {
    pub const ZERO: ReorderParams = ReorderParams { ssv: 0.0, st: 0 };

    pub fn new(ssv: f64, st: i64) -> ReorderParams {
        debug_assert!(ssv >= 0.0 && st >= 0);
        ReorderParams { ssv, st }
    }
}

/// Dense day-indexed quantity series: one value for every day in
/// `[start, start + len)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    start: Day,
    values: Vec<f64>,
}

impl DailySeries {
    pub fn new(start: Day, values: Vec<f64>) -> DailySeries {
        DailySeries { start, values }
    }

    pub fn zeros(start: Day, len: i64) -> DailySeries {
        DailySeries {
            start,
            values: vec![0.0; len.max(0) as usize],
        }
    }

    pub fn start(&self) -> Day {
        self.start
    }

    pub fn len(&self) -> i64 {
        self.values.len() as i64
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn span(&self) -> DayRange {
        DayRange::new(self.start, self.start + self.len())
    }

    /// Value on `day`; zero outside the stored span.
    pub fn get(&self, day: Day) -> f64 {
        let idx = day - self.start;
        if idx < 0 || idx >= self.len() {
            0.0
        } else {
            self.values[idx as usize]
        }
    }

    pub fn set(&mut self, day: Day, value: f64) {
        let idx = day - self.start;
        assert!(
            idx >= 0 && idx < self.len(),
            "day {day} outside series span {}",
            self.span()
        );
        self.values[idx as usize] = value;
    }

    pub fn add(&mut self, day: Day, value: f64) {
        let idx = day - self.start;
        assert!(idx >= 0 && idx < self.len());
        self.values[idx as usize] += value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values over a sub-window (must lie within the span).
    pub fn slice(&self, window: DayRange) -> Result<&[f64]> {
        if !self.span().contains_range(&window) {
            return Err(Error::Range(format!(
                "window {window} outside series span {}",
                self.span()
            )));
        }
        let a = (window.start - self.start) as usize;
        let b = (window.end - self.start) as usize;
        Ok(&self.values[a..b])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Day, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.start + i as i64, v))
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// One day-indexed inventory path with its arrivals and consumption.
///
/// All four series share the same start and length; `inventory[i]` is the
/// level at the *start* of day `start + i`, and for deterministic MRP output
/// the update identity
/// `inventory[i+1] = inventory[i] + std_arrivals[i] + exp_arrivals[i] - consumption[i]`
/// holds. Movement flows, when simulated, are folded into `consumption`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub inventory: DailySeries,
    pub std_arrivals: DailySeries,
    pub exp_arrivals: DailySeries,
    pub consumption: DailySeries,
}

impl Trajectory {
    pub fn new(
        inventory: DailySeries,
        std_arrivals: DailySeries,
        exp_arrivals: DailySeries,
        consumption: DailySeries,
    ) -> Trajectory {
        assert_eq!(inventory.start(), std_arrivals.start());
        assert_eq!(inventory.start(), exp_arrivals.start());
        assert_eq!(inventory.start(), consumption.start());
        assert_eq!(inventory.len(), std_arrivals.len());
        assert_eq!(inventory.len(), exp_arrivals.len());
        assert_eq!(inventory.len(), consumption.len());
        Trajectory {
            inventory,
            std_arrivals,
            exp_arrivals,
            consumption,
        }
    }

    pub fn start(&self) -> Day {
        self.inventory.start()
    }

    pub fn len(&self) -> i64 {
        self.inventory.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inventory.is_empty()
    }

    pub fn span(&self) -> DayRange {
        self.inventory.span()
    }
}

/// Level-set function: 1 when the inventory level is non-negative.
pub fn level_set(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Fraction of days in `window` on which the inventory level is not negative.
pub fn service_level(traj: &Trajectory, window: DayRange) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::Range(format!("empty service-level window {window}")));
    }
    let values = traj.inventory.slice(window)?;
    let positive_days: f64 = values.iter().copied().map(level_set).sum();
    Ok(positive_days / values.len() as f64)
}

/// Total holding cost of a trajectory: sum over days of
/// `max(inventory, 0) * holding_cost_per_unit_day`. Negative inventory
/// incurs no holding cost; stock-outs are penalized only through the
/// service-level constraint.
pub fn holding_cost(traj: &Trajectory, holding_cost_per_unit_day: f64) -> f64 {
    traj.inventory
        .values()
        .iter()
        .map(|&x| x.max(0.0) * holding_cost_per_unit_day)
        .sum()
}

/// Holding cost of a bare inventory series (same clamping rule).
pub fn holding_cost_of_series(inventory: &DailySeries, rate: f64) -> f64 {
    inventory.values().iter().map(|&x| x.max(0.0) * rate).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn traj(inventory: Vec<f64>) -> Trajectory {
        let n = inventory.len() as i64;
        let start = Day(0);
        Trajectory::new(
            DailySeries::new(start, inventory),
            DailySeries::zeros(start, n),
            DailySeries::zeros(start, n),
            DailySeries::zeros(start, n),
        )
    }

    #[test]
    fn day_iso_round_trip() {
        let d = Day::from_iso("2020-04-01").unwrap();
        assert_eq!(d.to_string(), "2020-04-01");
        assert_eq!((d + 30).to_string(), "2020-05-01");
        assert_eq!(Day::from_iso("1970-01-01").unwrap(), Day(0));
        assert!(Day::from_iso("not-a-date").is_err());
    }

    #[test]
    fn day_difference_is_day_count() {
        let a = Day::from_iso("2018-06-01").unwrap();
        let b = Day::from_iso("2020-03-01").unwrap();
        assert_eq!(b - a, 639);
        assert_eq!(a + (b - a), b);
    }

    #[test]
    fn service_level_counts_zero_as_in_stock() {
        // delta(0) = 1: [5, 3, 0, -1, 2] has four non-negative days out of five.
        let t = traj(vec![5.0, 3.0, 0.0, -1.0, 2.0]);
        let sl = service_level(&t, t.span()).unwrap();
        assert_eq!(sl, 0.8);
    }

    #[test]
    fn service_level_all_nonnegative_is_one() {
        let t = traj(vec![4.0, 0.0, 7.0]);
        assert_eq!(service_level(&t, t.span()).unwrap(), 1.0);
        assert_eq!(
            service_level(&t, DayRange::new(Day(1), Day(3))).unwrap(),
            1.0
        );
    }

    #[test]
    fn service_level_all_negative_is_zero() {
        let t = traj(vec![-1.0, -0.5, -9.0]);
        assert_eq!(service_level(&t, t.span()).unwrap(), 0.0);
    }

    #[test]
    fn service_level_rejects_bad_windows() {
        let t = traj(vec![1.0, 2.0]);
        assert!(service_level(&t, DayRange::new(Day(0), Day(0))).is_err());
        assert!(service_level(&t, DayRange::new(Day(0), Day(3))).is_err());
        assert!(service_level(&t, DayRange::new(Day(-1), Day(1))).is_err());
    }

    #[test]
    fn holding_cost_simple_sum() {
        let t = traj(vec![2.0, 2.0]);
        assert_eq!(holding_cost(&t, 1.0), 4.0);
    }

    #[test]
    fn holding_cost_clamps_negative_inventory() {
        // Negative day contributes zero: max(-5,0)*2 + max(3,0)*2 = 6.
        let t = traj(vec![-5.0, 3.0]);
        assert_eq!(holding_cost(&t, 2.0), 6.0);
    }

    #[test]
    fn holding_cost_zero_rate() {
        let t = traj(vec![10.0, -3.0, 42.0]);
        assert_eq!(holding_cost(&t, 0.0), 0.0);
    }

    #[test]
    fn planning_params_validation() {
        let mut p = PlanningParams {
            sku_id: "X".into(),
            lead_time: 6,
            expedited_lead_time: 2,
            ptf: 1,
            moq: 0.0,
            rounding_value: 1.0,
            holding_cost: 1.0,
            order_cost: 0.0,
            target_sl: 0.95,
            horizon: 30,
            seeding_window: 6,
        };
        assert!(p.validate().is_ok());
        p.expedited_lead_time = 7; // ELT > LT
        assert!(p.validate().is_err());
        p.expedited_lead_time = 2;
        p.rounding_value = 0.0;
        assert!(p.validate().is_err());
        p.rounding_value = 1.0;
        p.lead_time = 31; // LT > H
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn level_set_scale_invariant(x in -1e6_f64..1e6, c in 1e-6_f64..1e6) {
            prop_assert_eq!(level_set(x), level_set(c * x));
        }

        #[test]
        fn service_level_monotone_under_lift(
            inv in proptest::collection::vec(-100.0_f64..100.0, 1..40),
            lift in 0.0_f64..50.0,
        ) {
            let base = traj(inv.clone());
            let lifted = traj(inv.iter().map(|x| x + lift).collect());
            let w = base.span();
            prop_assert!(service_level(&lifted, w).unwrap() >= service_level(&base, w).unwrap());
        }

        #[test]
        fn holding_cost_linear_in_rate(
            inv in proptest::collection::vec(-100.0_f64..100.0, 1..40),
            rate in 0.0_f64..10.0,
        ) {
            let t = traj(inv);
            let unit = holding_cost(&t, 1.0);
            prop_assert!((holding_cost(&t, rate) - rate * unit).abs() <= 1e-9 * (1.0 + unit.abs() * rate));
        }

        #[test]
        fn holding_cost_monotone_on_nonnegative(
            inv in proptest::collection::vec(0.0_f64..100.0, 1..40),
            bump in proptest::collection::vec(0.0_f64..10.0, 40),
        ) {
            let raised: Vec<f64> = inv.iter().zip(&bump).map(|(a, b)| a + b).collect();
            let t0 = traj(inv);
            let t1 = traj(raised);
            prop_assert!(holding_cost(&t1, 1.0) >= holding_cost(&t0, 1.0));
        }
    }
}
