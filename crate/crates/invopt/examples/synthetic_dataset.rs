//! Generate a synthetic fleet, write it as the six ingestion CSVs, and load
//! it back. The written directory is directly usable by the `invopt`
//! binary (`--data target/demo-data`).
//!
//! Run with: cargo run -p invopt --example synthetic_dataset

use invopt::domain::{Day, DayRange};
use invopt::ingest::{load_fleet, write_fleet};
use invopt::synth::{fleet, SynthProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Two years of history starting 2018-06-01.
    let start = Day::from_iso("2018-06-01")?;
    let span = DayRange::new(start, start + 730);

    let datasets = fleet(4, 42, span, |i, spec| match i {
        // an over-forecasting SKU
        1 => spec.profile.forecast_bias = 4.0,
        // a SKU with no demand forecast capability at all
        2 => {
            spec.profile.forecast_bias = -spec.profile.base_demand;
            spec.profile.forecast_noise = 0.0;
        }
        // a fully deterministic SKU
        3 => spec.profile = SynthProfile::deterministic(12.0),
        _ => {}
    });

    let out = std::path::Path::new("target/demo-data");
    write_fleet(out, &datasets)?;
    println!("wrote {} SKUs to {}", datasets.len(), out.display());

    let reloaded = load_fleet(out)?;
    for (sku, ds) in &reloaded {
        println!(
            "  {sku}: span {} .. {}, {} orders, {} forecast entries",
            ds.span.start,
            ds.span.end,
            ds.orders.orders.len(),
            ds.forecasts.entries().count(),
        );
    }
    println!();
    println!("try, for example:");
    println!("  cargo run -p invopt -- train --data target/demo-data --out target/demo-out \\");
    println!("      --training-start 2018-07-01 --training-end 2020-03-01");
    Ok(())
}
