//! The SSV lifting loop at one sampling time: watch the deficit shrink as
//! the safety stock rises.
//!
//! Run with: cargo run -p invopt --example k_iteration

use invopt::domain::{DailySeries, Day, DayRange};
use invopt::optimizer::{k_iteration, ForwardSimConfig, SamplingContext};
use invopt::synth::SynthSpec;
use invopt::uncertainty::{build_uncertainty_set, usw_window, UswMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let span = DayRange::new(Day(0), Day(365));
    let mut spec = SynthSpec::standard("DEMO", 11, span);
    // no usable forecast: the planner sees zero demand, reality consumes
    spec.profile.forecast_bias = -spec.profile.base_demand;
    spec.profile.forecast_noise = 0.0;
    let ds = spec.generate();

    let t = Day(300);
    let period = DayRange::new(t, Day(360));
    let usw = usw_window(t, period, ds.params.lead_time, 14, 30, UswMode::Validation)?;
    let uset = build_uncertainty_set(&ds, usw, 0.5, 5.0, 1.0)?;

    let cfg = ForwardSimConfig {
        n_realizations: 100,
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
    let outcome = k_iteration(&ds, t, &uset, &cfg, &DailySeries::zeros(t, 1), &ctx)?;

    println!("iteration    ssv     deficit   share of realizations at target");
    for step in &outcome.trace {
        println!(
            "{:>9} {:>8.2} {:>10.2}   {:>5.1}%",
            step.iteration,
            step.ssv,
            step.deficit,
            100.0 * step.slp_attained
        );
    }
    println!(
        "result: ssv {:.2}, st {} d, converged = {}",
        outcome.reorder.ssv, outcome.reorder.st, outcome.converged
    );
    Ok(())
}
