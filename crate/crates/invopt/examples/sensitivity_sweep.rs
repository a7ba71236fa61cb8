//! Sweep the realization count over a small fleet and watch the fleet
//! metrics stabilize as the Monte-Carlo noise shrinks.
//!
//! Run with: cargo run -p invopt --example sensitivity_sweep

use invopt::backtest::{aggregate_metrics, run_backtest, BacktestConfig};
use invopt::domain::{Day, DayRange};
use invopt::optimizer::ForwardSimConfig;
use invopt::synth::fleet;
use invopt::uncertainty::UswMode;
use std::collections::BTreeMap;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let span = DayRange::new(Day(0), Day(300));
    let datasets = fleet(4, 7, span, |i, spec| {
        spec.actual_reorder.ssv = 80.0 + 10.0 * i as f64;
        spec.initial_inventory = 150.0;
    });

    println!("  n_r     r_ad    s_inv_bar    s_ss_bar     s_ss_op");
    for n_r in [25, 50, 100, 250, 500] {
        let mut per_sku = BTreeMap::new();
        for (sku, ds) in &datasets {
            let cfg = BacktestConfig {
                period: DayRange::new(Day(200), Day(290)),
                frequency: 30,
                n_os: 10,
                fwd: ForwardSimConfig {
                    n_realizations: n_r,
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
            let result = run_backtest(ds, &cfg)?;
            per_sku.insert(
                sku.clone(),
                (result.sl, ds.params.target_sl, result.savings_terms),
            );
        }
        let m = aggregate_metrics(&per_sku)?;
        println!(
            "{:>5} {:>8.2} {:>12.4} {:>11.4} {:>11.4}",
            n_r, m.r_ad, m.s_inv_bar, m.s_ss_bar, m.s_ss_op
        );
    }
    Ok(())
}
