//! Live mode: run the receding loop through "today" and keep only the
//! final recommendation. No comparison against actuals is made.
//!
//! Run with: cargo run -p invopt --example live_recommendation

use invopt::backtest::{recommend_live, BacktestConfig};
use invopt::domain::{Day, DayRange};
use invopt::optimizer::ForwardSimConfig;
use invopt::synth::SynthSpec;
use invopt::uncertainty::UswMode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let span = DayRange::new(Day(0), Day(400));
    let ds = SynthSpec::standard("DEMO", 57, span).generate();
    let today = Day(400); // the last date with data

    let cfg = BacktestConfig {
        period: DayRange::new(Day(280), Day(400)),
        frequency: 30,
        n_os: 10,
        fwd: ForwardSimConfig {
            n_realizations: 100,
            slp: 0.9,
            stp: 0.5,
            sl_min: ds.params.target_sl,
            max_iterations: 10,
            aggregation_percentile: 0.5,
        },
        usw_mode: UswMode::Validation,
        b_usw: 14,
        l_min_usw: 30,
        n_c: 5.0,
        n_u: 1.0,
        seed: 42,
    };

    let (reorder, outcome) = recommend_live(&ds, &cfg, today)?;
    println!("recommendation for {today}:");
    println!("  safety stock value: {:.1}", reorder.ssv);
    println!("  safety time       : {} days", reorder.st);
    println!(
        "  lifting iterations: {} (converged: {})",
        outcome.trace.len(),
        outcome.converged
    );
    Ok(())
}
