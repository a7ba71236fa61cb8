//! Full validation backtest on one SKU: stair-stepped recommendations,
//! simulated-vs-actual trajectory, and the scoring metrics.
//!
//! Run with: cargo run -p invopt --example backtest_validation

use invopt::backtest::{run_backtest, BacktestConfig};
use invopt::domain::{Day, DayRange};
use invopt::optimizer::ForwardSimConfig;
use invopt::synth::SynthSpec;
use invopt::uncertainty::UswMode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let span = DayRange::new(Day(0), Day(400));
    let mut spec = SynthSpec::standard("DEMO", 33, span);
    spec.actual_reorder.ssv = 120.0; // the operator ran a generous buffer
    spec.initial_inventory = 180.0;
    let ds = spec.generate();

    let cfg = BacktestConfig {
        period: DayRange::new(Day(240), Day(390)),
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
    let result = run_backtest(&ds, &cfg)?;

    println!("recommendations (stair-stepped every {} days):", cfg.frequency);
    for (day, r) in &result.recommendations {
        println!("  {day}: ssv {:>7.1}, st {} d", r.ssv, r.st);
    }

    println!("\n  day     actual    sim median");
    for offset in (0..150).step_by(15) {
        let day = Day(240 + offset);
        println!(
            "  {day}  {:>8.1}  {:>12.1}",
            ds.actual_inventory.get(day),
            result.median_trajectory.inventory.get(day)
        );
    }

    println!("\nservice level (median realization, after first lead time): {:.3}", result.sl);
    println!("target service level: {:.3}", ds.params.target_sl);
    println!("inventory holding cost saving : {:>6.1}%", 100.0 * result.metrics.s_inv_bar);
    println!("safety stock cost saving      : {:>6.1}%", 100.0 * result.metrics.s_ss_bar);
    println!("safety stock saving at op date: {:>6.1}%", 100.0 * result.metrics.s_ss_op);
    println!("orders placed by the simulation: {}", result.n_orders);
    Ok(())
}
