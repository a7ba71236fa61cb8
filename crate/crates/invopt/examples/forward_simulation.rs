//! One forward-looking simulation: steady-state initial inventory, a
//! batch of perturbed realizations, and the inventory deficit that the
//! lifting loop would apply.
//!
//! Run with: cargo run -p invopt --example forward_simulation

use invopt::domain::{Day, DayRange};
use invopt::mrp::apply_safety_time;
use invopt::optimizer::{
    forward_simulate, inventory_deficit, scoring_window, steady_state_x0, ForwardInputs,
    ForwardSimConfig, SamplingContext,
};
use invopt::synth::SynthSpec;
use invopt::uncertainty::{build_uncertainty_set, usw_window, UswMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let span = DayRange::new(Day(0), Day(365));
    let mut spec = SynthSpec::standard("DEMO", 3, span);
    spec.profile.forecast_bias = -3.0; // under-forecast: realizations drain
    let ds = spec.generate();
    let t = Day(300);

    let period = DayRange::new(t, Day(360));
    let usw = usw_window(t, period, ds.params.lead_time, 14, 30, UswMode::Validation)?;
    let uset = build_uncertainty_set(&ds, usw, 0.5, 5.0, 1.0)?;

    let st = uset.u_st.percentile(0.5) as i64;
    let raw = ds.forecasts.row(t, ds.params.horizon);
    let shifted = apply_safety_time(&raw, st);
    let seeded = vec![0.0; ds.params.horizon as usize];

    let ssv = 20.0;
    let x0 = steady_state_x0(ssv, &shifted, &seeded, ds.params.lead_time);
    println!("candidate ssv {ssv}, safety time {st} d, steady-state x0 = {x0:.1}");

    let cfg = ForwardSimConfig {
        n_realizations: 200,
        slp: 0.9,
        stp: 0.5,
        sl_min: ds.params.target_sl,
        max_iterations: 10,
        aggregation_percentile: 0.5,
    };
    let ctx = SamplingContext {
        seed: 42,
        sku: "DEMO",
        sampling_time: t,
    };
    let inputs = ForwardInputs {
        params: &ds.params,
        shifted_forecast: shifted,
        raw_forecast: raw,
        seeded_std: seeded,
        ssv,
    };
    let bundle = forward_simulate(&inputs, &uset, &cfg, &ctx);

    println!("base plan placed {} orders", bundle.base.placed.len());
    let scoring = scoring_window(&ds.params, st, t)?;
    println!("scoring window {scoring}");

    // realization spread at a few days
    for offset in [0, 7, 14, 21] {
        let day = t + offset;
        let mut column: Vec<f64> = bundle
            .trajectories
            .iter()
            .map(|tr| tr.inventory.get(day))
            .collect();
        column.sort_by(|a, b| a.partial_cmp(b).unwrap());
        println!(
            "  day {offset:>2}: p5 {:>8.1}   median {:>8.1}   p95 {:>8.1}",
            column[column.len() / 20],
            column[column.len() / 2],
            column[column.len() * 19 / 20]
        );
    }

    let h = inventory_deficit(&bundle, cfg.slp, cfg.sl_min, scoring)?;
    println!("inventory deficit at ssv {ssv}: h = {h:.2}");
    Ok(())
}
