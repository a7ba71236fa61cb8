//! Deterministic safety-stock MRP.
//!
//! [`run_mrp`] projects inventory over the planning horizon and tops it up
//! in three phases: inside the expedited lead time nothing can be done and
//! the projection may go negative; between expedited and standard lead time
//! expedited orders restore the level to zero; beyond the lead time standard
//! orders restore it to the safety stock value, subject to minimum-order-
//! quantity and rounding-value lot rules. A pre-pass ([`cancel_orders`])
//! trims previously planned arrivals that would land as surplus between the
//! planning time fence and the lead time.
//!
//! Everything here is a pure function of its inputs: identical inputs give
//! bit-identical outputs.

use crate::domain::PlanningParams;

/// Absolute tolerance on the reorder/top-up triggers, so float dust on a
/// projected level does not cause spurious orders.
pub const QTY_EPS: f64 = 1e-9;

/// Inputs for one deterministic MRP run. All series share the horizon
/// length `params.horizon`; `forecast` is the demand row already shifted by
/// safety time (see [`apply_safety_time`]).
#[derive(Debug, Clone)]
pub struct MrpInput {
    pub starting_inventory: f64,
    pub forecast: Vec<f64>,
    pub std_arrivals: Vec<f64>,
    pub exp_arrivals: Vec<f64>,
    pub params: PlanningParams,
    pub ssv: f64,
}

impl MrpInput {
    fn assert_lengths(&self) {
        let h = self.params.horizon as usize;
        assert_eq!(self.forecast.len(), h, "forecast length != horizon");
        assert_eq!(self.std_arrivals.len(), h, "std arrivals length != horizon");
        assert_eq!(self.exp_arrivals.len(), h, "exp arrivals length != horizon");
    }
}

/// One order placed by the MRP run, indexed by its arrival day offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedOrder {
    /// Day offset (from the run start) on which the order arrives.
    pub arrival: usize,
    pub quantity: f64,
    pub expedited: bool,
}

/// Result of one MRP run: the updated arrival schedules, the projected
/// inventory path (length horizon + 1, `projected[0]` = starting inventory)
/// and the orders newly placed by this run.
#[derive(Debug, Clone, PartialEq)]
pub struct MrpOutput {
    pub std_arrivals: Vec<f64>,
    pub exp_arrivals: Vec<f64>,
    pub projected: Vec<f64>,
    pub placed: Vec<PlacedOrder>,
}

/// Cancellation pre-pass: walk arrival days from the lead time down to just
/// above the planning time fence; wherever the cumulative projection carries
/// surplus above the safety stock, reduce that day's standard arrival by the
/// surplus (never below zero). Expedited arrivals and days at or inside the
/// fence are never touched. Iterating backwards keeps a cancellation from
/// affecting the surplus already measured at later days.
pub fn cancel_orders(
    starting_inventory: f64,
    std_arrivals: &[f64],
    exp_arrivals: &[f64],
    forecast: &[f64],
    ptf: i64,
    lead_time: i64,
    ssv: f64,
) -> Vec<f64> {
    let mut sa = std_arrivals.to_vec();
    if ptf >= lead_time {
        return sa;
    }
    let last = (lead_time as usize).min(sa.len().saturating_sub(1));
    let mut k = last as i64;
    while k > ptf {
        let idx = k as usize;
        let mut surplus = starting_inventory - ssv;
        for i in 0..=idx {
            surplus += sa[i] + exp_arrivals[i] - forecast[i];
        }
        if surplus > 0.0 {
            if surplus > sa[idx] {
                sa[idx] = 0.0;
            } else {
                sa[idx] -= surplus;
            }
        }
        k -= 1;
    }
    sa
}

/// Quantity of a standard order covering a deficit `delta`, lot-ruled:
/// `max(ceil((delta - moq) / rv), 0) * rv + moq`.
fn lot_quantity(delta: f64, moq: f64, rounding_value: f64) -> f64 {
    let steps = ((delta - moq) / rounding_value - QTY_EPS).ceil().max(0.0);
    steps * rounding_value + moq
}

/// Run the safety-stock MRP over the horizon.
pub fn run_mrp(input: &MrpInput) -> MrpOutput {
    input.assert_lengths();
    let p = &input.params;
    let h = p.horizon as usize;
    let elt = p.expedited_lead_time as usize;
    let lt = p.lead_time as usize;

    let mut sa = cancel_orders(
        input.starting_inventory,
        &input.std_arrivals,
        &input.exp_arrivals,
        &input.forecast,
        p.ptf,
        p.lead_time,
        input.ssv,
    );
    let mut ea = input.exp_arrivals.clone();
    let mut placed = Vec::new();

    let mut projected = vec![0.0; h + 1];
    projected[0] = input.starting_inventory;

    // Phase (a): inside the expedited lead time nothing can arrive sooner,
    // so the projection simply rolls forward and may go negative.
    for i in 0..elt {
        projected[i + 1] = projected[i] + sa[i] + ea[i] - input.forecast[i];
    }

    // Phase (b): expedited orders restore the level to zero.
    for i in elt..lt {
        let tentative = projected[i] + sa[i] + ea[i] - input.forecast[i];
        if tentative < -QTY_EPS {
            let qty = -tentative;
            ea[i] += qty;
            placed.push(PlacedOrder {
                arrival: i,
                quantity: qty,
                expedited: true,
            });
            // The top-up lands exactly on the restored target.
            projected[i + 1] = 0.0;
        } else {
            projected[i + 1] = tentative;
        }
    }

    // Phase (c): standard orders restore the level to the safety stock,
    // rounded up to the lot rules.
    for i in lt..h {
        let tentative = projected[i] + sa[i] + ea[i] - input.forecast[i];
        if tentative < input.ssv - QTY_EPS {
            let qty = lot_quantity(input.ssv - tentative, p.moq, p.rounding_value);
            sa[i] += qty;
            placed.push(PlacedOrder {
                arrival: i,
                quantity: qty,
                expedited: false,
            });
            projected[i + 1] = tentative + qty;
        } else {
            projected[i + 1] = tentative;
        }
    }

    MrpOutput {
        std_arrivals: sa,
        exp_arrivals: ea,
        projected,
        placed,
    }
}

/// Shift a demand row earlier by `st` days, so orders arrive `st` days
/// before the demand they cover. Demand shifted past the start of the
/// horizon accumulates on day 0.
pub fn apply_safety_time(forecast: &[f64], st: i64) -> Vec<f64> {
    assert!(st >= 0, "safety time must be non-negative");
    if st == 0 {
        return forecast.to_vec();
    }
    let mut shifted = vec![0.0; forecast.len()];
    for (i, &v) in forecast.iter().enumerate() {
        let j = (i as i64 - st).max(0) as usize;
        shifted[j] += v;
    }
    shifted
}
