//! Seeded synthetic SKU datasets.
//!
//! Generates self-consistent histories (consumption, forecasts, orders,
//! movements, inventory) for tests, examples and demo runs. Quantities are
//! integer-valued so that exactness checks (zero-uncertainty replay,
//! conservation identities) hold bit-for-bit. The actual inventory path is
//! rolled with the same flow conventions the simulator uses.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{DailySeries, Day, DayRange, PlanningParams, ReorderParams};
use crate::ingest::{ForecastMatrix, Order, OrderLedger, SkuDataset};
use crate::rng::{Purpose, StreamKey};

/// Stochastic character of a synthetic SKU.
#[derive(Debug, Clone)]
pub struct SynthProfile {
    /// Mean daily consumption.
    pub base_demand: f64,
    /// Uniform +- amplitude on daily consumption (0 = deterministic).
    pub demand_noise: f64,
    /// Systematic forecast bias: forecast = actual + bias + noise.
    pub forecast_bias: f64,
    /// Uniform +- amplitude of forecast noise.
    pub forecast_noise: f64,
    /// Actual delivery delay is drawn uniformly from these day counts.
    pub delay_choices: Vec<i64>,
    /// Probability that a delivered order is short at all.
    pub shortage_prob: f64,
    /// A short order loses a uniform [0, max_shortage_frac] share of the
    /// planned quantity.
    pub max_shortage_frac: f64,
    /// Probability of a movement event on a given day.
    pub movement_rate: f64,
    /// Uniform +- amplitude of a movement event.
    pub movement_amplitude: f64,
}

impl SynthProfile {
    /// Forecasts exactly equal actuals, orders arrive on time in full,
    /// no movements: the fully deterministic world.
    pub fn deterministic(base_demand: f64) -> SynthProfile {
        SynthProfile {
            base_demand,
            demand_noise: 0.0,
            forecast_bias: 0.0,
            forecast_noise: 0.0,
            delay_choices: vec![0],
            shortage_prob: 0.0,
            max_shortage_frac: 0.0,
            movement_rate: 0.0,
            movement_amplitude: 0.0,
        }
    }

    /// Moderate noise on every channel. Shortages are rare events, the way
    /// supplier-quantity residual histograms look in practice (mostly
    /// zeros, a thin negative tail).
    pub fn noisy(base_demand: f64) -> SynthProfile {
        SynthProfile {
            base_demand,
            demand_noise: base_demand * 0.3,
            forecast_bias: 0.0,
            forecast_noise: base_demand * 0.3,
            delay_choices: vec![0, 0, 0, 1, 1, 2, 3],
            shortage_prob: 0.2,
            max_shortage_frac: 0.1,
            movement_rate: 0.05,
            movement_amplitude: base_demand * 0.3,
        }
    }
}

/// Full description of one synthetic SKU.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub sku_id: String,
    pub seed: u64,
    /// Span of the published history.
    pub span: DayRange,
    pub params: PlanningParams,
    pub forecast_cadence: i64,
    pub actual_reorder: ReorderParams,
    /// Days between planned order arrivals in the historical ledger.
    pub order_cycle: i64,
    pub initial_inventory: f64,
    pub profile: SynthProfile,
}

impl SynthSpec {
    /// A sensible default SKU over `span`: lead time 6, horizon 42,
    /// daily forecasts, noisy profile.
    pub fn standard(sku_id: &str, seed: u64, span: DayRange) -> SynthSpec {
        let base = 10.0;
        SynthSpec {
            sku_id: sku_id.to_string(),
            seed,
            span,
            params: PlanningParams {
                sku_id: sku_id.to_string(),
                lead_time: 6,
                expedited_lead_time: 2,
                // fence one day inside the lead time: old excess arriving
                // exactly at the lead time can still be cancelled, fresh
                // lot-rounded orders cannot be immediately un-rounded
                ptf: 5,
                // lot rules sized so simulated orders come out comparable
                // to the weekly historical orders the residuals are
                // sampled from
                moq: base * 4.0,
                rounding_value: 5.0,
                holding_cost: 1.0,
                order_cost: 0.0,
                target_sl: 0.95,
                horizon: 42,
                seeding_window: 6,
            },
            forecast_cadence: 1,
            actual_reorder: ReorderParams::new(base * 8.0, 0),
            order_cycle: 7,
            initial_inventory: base * 10.0,
            profile: SynthProfile::noisy(base),
        }
    }

    /// The deterministic world: zero uncertainty on every channel.
    pub fn zero_uncertainty(sku_id: &str, seed: u64, span: DayRange) -> SynthSpec {
        let mut spec = SynthSpec::standard(sku_id, seed, span);
        spec.profile = SynthProfile::deterministic(10.0);
        spec
    }

    fn lane(&self, lane: u32) -> ChaCha8Rng {
        StreamKey {
            seed: self.seed,
            sku: &self.sku_id,
            sampling_time: self.span.start,
            realization: lane,
            purpose: Purpose::Synthesis,
        }
        .rng()
    }

    /// Generate the dataset.
    pub fn generate(&self) -> SkuDataset {
        let p = &self.profile;
        let span = self.span;
        let horizon = self.params.horizon;

        // Underlying demand extends beyond the span so forecasts made near
        // the end still have targets, and back before it for lagged origins.
        let back = self.params.lead_time + 40;
        let demand_span = DayRange::new(span.start - back, span.end + horizon + 1);
        let mut demand_rng = self.lane(0);
        let mut demand: BTreeMap<Day, f64> = BTreeMap::new();
        for d in demand_span.days() {
            let noise = if p.demand_noise > 0.0 {
                demand_rng.random_range(-p.demand_noise..=p.demand_noise)
            } else {
                0.0
            };
            let q = (p.base_demand + noise).round().max(0.0);
            demand.insert(d, q);
        }

        // Forecasts: one origin row every `forecast_cadence` days, covering
        // the horizon, anchored on the underlying demand plus bias + noise.
        // The noise is a property of the target day, stable across origins
        // (forecasts update slowly in practice; re-noising every origin
        // would make consecutive planning runs thrash).
        let mut forecast_rng = self.lane(1);
        let mut target_noise: BTreeMap<Day, f64> = BTreeMap::new();
        for d in demand_span.days() {
            let noise = if p.forecast_noise > 0.0 {
                forecast_rng.random_range(-p.forecast_noise..=p.forecast_noise)
            } else {
                0.0
            };
            target_noise.insert(d, noise);
        }
        let mut forecasts = ForecastMatrix::new(self.forecast_cadence);
        let mut origin = span.start - back;
        while origin < span.end {
            for i in 0..horizon {
                let target = origin + i;
                let Some(&actual) = demand.get(&target) else {
                    continue;
                };
                let q = (actual + p.forecast_bias + target_noise[&target])
                    .round()
                    .max(0.0);
                forecasts.insert(origin, target, q).unwrap();
            }
            origin = origin + self.forecast_cadence;
        }

        // Movements: sparse signed events on two channels.
        let mut movement_rng = self.lane(3);
        let mut misc = DailySeries::zeros(span.start, span.len());
        let mut blocked = DailySeries::zeros(span.start, span.len());
        if p.movement_rate > 0.0 {
            for d in span.days() {
                if movement_rng.random_range(0.0..1.0) < p.movement_rate {
                    let amp = movement_rng
                        .random_range(-p.movement_amplitude..=p.movement_amplitude)
                        .round();
                    misc.add(d, amp);
                }
                if movement_rng.random_range(0.0..1.0) < p.movement_rate / 2.0 {
                    let amp = movement_rng
                        .random_range(-p.movement_amplitude..=p.movement_amplitude)
                        .round();
                    blocked.add(d, amp);
                }
            }
        }

        // Order ledger and the actual inventory path, simulated together:
        // every `order_cycle` days the operator places an order-up-to-S
        // replenishment (S sized from the buffer they actually ran), which
        // then delivers with the profile's delays and shortages. Orders
        // planned past the span end stay pending (no actuals).
        let mut order_rng = self.lane(2);
        let mut orders: Vec<Order> = Vec::new();
        let consumption =
            DailySeries::new(span.start, span.days().map(|d| demand[&d]).collect());
        let cycle = self.order_cycle.max(1);
        let order_up_to =
            self.actual_reorder.ssv + p.base_demand * (cycle + self.params.lead_time) as f64;
        let mut arrivals = DailySeries::zeros(span.start, span.len());
        let mut inventory = DailySeries::zeros(span.start, span.len());
        let mut x = self.initial_inventory;
        let mut n = 0usize;
        let review_horizon = span.end + horizon;
        let mut review = span.start;
        let mut day = span.start;
        while day < review_horizon {
            let in_span = span.contains(day);
            if in_span {
                inventory.set(day, x);
            }
            if day == review {
                // position = on hand + everything still on the way
                let pending: f64 = orders
                    .iter()
                    .filter(|o| o.actual_date.map_or(true, |a| a >= day))
                    .map(|o| o.actual_qty.unwrap_or(o.planned_qty))
                    .sum();
                let position = if in_span { x } else { order_up_to } + pending;
                let qty = (order_up_to - position).round();
                if qty >= 1.0 {
                    let planned = day + cycle;
                    let delay =
                        p.delay_choices[order_rng.random_range(0..p.delay_choices.len())];
                    let shorted = p.shortage_prob > 0.0
                        && order_rng.random_range(0.0..1.0) < p.shortage_prob;
                    let shortage_frac = if shorted && p.max_shortage_frac > 0.0 {
                        order_rng.random_range(0.0..=p.max_shortage_frac)
                    } else {
                        0.0
                    };
                    let delivered_on = planned + delay;
                    let actual = if planned < span.end && delivered_on < span.end {
                        Some((delivered_on, (qty * (1.0 - shortage_frac)).round().max(0.0)))
                    } else {
                        None
                    };
                    if let Some((d, q)) = actual {
                        arrivals.add(d, q);
                    }
                    orders.push(Order {
                        id: format!("{}-{:04}", self.sku_id, n),
                        planned_date: planned,
                        planned_qty: qty,
                        actual_date: actual.map(|(d, _)| d),
                        actual_qty: actual.map(|(_, q)| q),
                    });
                    n += 1;
                }
                review = review + cycle;
            }
            if in_span {
                x = x + arrivals.get(day)
                    - consumption.get(day)
                    - (misc.get(day) + blocked.get(day));
            }
            day = day + 1;
        }
        let ledger = OrderLedger { orders };

        SkuDataset {
            params: self.params.clone(),
            actual_reorder: self.actual_reorder,
            actual_inventory: inventory,
            actual_consumption: consumption,
            misc_movements: misc,
            blocked_movements: blocked,
            forecasts,
            orders: ledger,
            span,
        }
    }
}

/// Generate a fleet of varied SKUs sharing a base seed.
pub fn fleet(
    n: usize,
    base_seed: u64,
    span: DayRange,
    customize: impl Fn(usize, &mut SynthSpec),
) -> BTreeMap<String, SkuDataset> {
    (0..n)
        .map(|i| {
            let sku_id = format!("SKU-{i:03}");
            let mut spec = SynthSpec::standard(&sku_id, base_seed.wrapping_add(i as u64), span);
            customize(i, &mut spec);
            (sku_id, spec.generate())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span() -> DayRange {
        DayRange::new(Day(0), Day(120))
    }

    #[test]
    fn generation_is_deterministic() {
        let a = SynthSpec::standard("S", 5, span()).generate();
        let b = SynthSpec::standard("S", 5, span()).generate();
        assert_eq!(a.actual_consumption, b.actual_consumption);
        assert_eq!(a.actual_inventory, b.actual_inventory);
        assert_eq!(a.orders.orders, b.orders.orders);
        let c = SynthSpec::standard("S", 6, span()).generate();
        assert_ne!(a.actual_consumption, c.actual_consumption);
    }

    #[test]
    fn zero_uncertainty_world_is_exact() {
        let ds = SynthSpec::zero_uncertainty("Z", 1, span()).generate();
        // forecasts equal actual consumption at every lag
        for d in DayRange::new(Day(10), Day(100)).days() {
            let actual = ds.actual_consumption.get(d);
            assert_eq!(ds.forecasts.value_at(d - 6, d), actual);
            assert_eq!(ds.forecasts.value_at(d, d), actual);
        }
        // delivered orders are on time, in full
        for o in &ds.orders.orders {
            if let (Some(ad), Some(aq)) = (o.actual_date, o.actual_qty) {
                assert_eq!(ad, o.planned_date);
                assert_eq!(aq, o.planned_qty);
            }
        }
        assert_eq!(ds.misc_movements.sum(), 0.0);
    }

    #[test]
    fn inventory_path_is_flow_consistent() {
        let ds = SynthSpec::standard("S", 9, span()).generate();
        let arrivals = ds.orders.actual_arrivals(ds.span);
        for d in DayRange::new(Day(0), Day(119)).days() {
            let expect = ds.actual_inventory.get(d) + arrivals.get(d)
                - ds.actual_consumption.get(d)
                - ds.movement_sum(d);
            assert_eq!(ds.actual_inventory.get(d + 1), expect);
        }
    }

    #[test]
    fn csv_round_trip_reproduces_fleet() {
        let dir = tempfile::tempdir().unwrap();
        let fleet = fleet(3, 42, span(), |i, spec| {
            if i == 1 {
                spec.profile = SynthProfile::deterministic(8.0);
            }
        });
        crate::ingest::write_fleet(dir.path(), &fleet).unwrap();
        let loaded = crate::ingest::load_fleet(dir.path()).unwrap();
        assert_eq!(loaded.len(), 3);
        for (sku, original) in &fleet {
            let l = &loaded[sku];
            assert_eq!(l.actual_inventory, original.actual_inventory);
            assert_eq!(l.actual_consumption, original.actual_consumption);
            assert_eq!(l.misc_movements, original.misc_movements);
            assert_eq!(l.blocked_movements, original.blocked_movements);
            assert_eq!(l.orders.orders, original.orders.orders);
            assert_eq!(l.span, original.span);
            let fa: Vec<_> = l.forecasts.entries().collect();
            let fb: Vec<_> = original.forecasts.entries().collect();
            assert_eq!(fa, fb);
            assert_eq!(l.params.lead_time, original.params.lead_time);
            assert_eq!(l.actual_reorder, original.actual_reorder);
        }
    }
}
