//! Hyper-parameter grid search on a training period: per-cell cost and
//! service level, feasibility, and the chosen pair.
//!
//! Run with: cargo run -p invopt --example grid_search_training

use invopt::backtest::BacktestConfig;
use invopt::domain::{Day, DayRange};
use invopt::optimizer::ForwardSimConfig;
use invopt::synth::SynthSpec;
use invopt::trainer::{train, HyperGrid};
use invopt::uncertainty::UswMode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let span = DayRange::new(Day(0), Day(400));
    let ds = SynthSpec::standard("DEMO", 21, span).generate();
    let training = DayRange::new(Day(0), Day(360));

    let grid = HyperGrid::new(vec![0.5, 0.7, 0.9, 0.925, 0.95], vec![0.0, 0.5])?;
    let cfg = BacktestConfig {
        period: training,
        frequency: 30,
        n_os: 10,
        fwd: ForwardSimConfig {
            n_realizations: 60,
            slp: 0.5,
            stp: 0.0,
            sl_min: ds.params.target_sl,
            max_iterations: 10,
            aggregation_percentile: 0.5,
        },
        usw_mode: UswMode::Training,
        b_usw: 14,
        l_min_usw: 30,
        n_c: 5.0,
        n_u: 1.0,
        seed: 42,
    };

    let report = train(&ds, &grid, &cfg, training)?;
    println!("   slp    stp   median cost   median sl   feasible");
    for cell in &report.cells {
        println!(
            "{:>6.3} {:>6.2} {:>13.1} {:>11.3}   {}",
            cell.slp,
            cell.stp,
            cell.median_cost,
            cell.median_sl,
            if cell.feasible { "yes" } else { "no" }
        );
    }
    println!(
        "chosen: slp {:.3}, stp {:.2} ({})",
        report.chosen_slp,
        report.chosen_stp,
        if report.feasible {
            "cheapest feasible cell"
        } else {
            "fallback: nothing feasible"
        }
    );
    Ok(())
}
