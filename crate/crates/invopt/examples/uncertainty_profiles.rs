//! Build the four empirical uncertainty distributions from a synthetic
//! SKU's history and inspect their shapes.
//!
//! Run with: cargo run -p invopt --example uncertainty_profiles

use invopt::domain::{Day, DayRange};
use invopt::synth::SynthSpec;
use invopt::uncertainty::{build_uncertainty_set, usw_window, UswMode};

fn sketch(samples: &[f64]) -> String {
    let (min, max) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if min == max {
        return format!("all samples = {min:.1}");
    }
    let mut bins = [0usize; 10];
    for &v in samples {
        let t = ((v - min) / (max - min) * 9.999) as usize;
        bins[t.min(9)] += 1;
    }
    let bars: String = bins
        .iter()
        .map(|&n| match n {
            0 => ' ',
            1..=2 => '.',
            3..=6 => ':',
            7..=14 => '|',
            _ => '#',
        })
        .collect();
    format!("[{min:>7.1} {bars} {max:<7.1}] n={}", samples.len())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let span = DayRange::new(Day(0), Day(365));
    let mut spec = SynthSpec::standard("DEMO", 7, span);
    spec.profile.forecast_bias = 2.0; // systematic over-forecast
    let ds = spec.generate();

    // Growing validation window at three sampling times.
    let period = DayRange::new(Day(200), Day(360));
    for t in [Day(200), Day(260), Day(320)] {
        let usw = usw_window(t, period, ds.params.lead_time, 14, 30, UswMode::Validation)?;
        let set = build_uncertainty_set(&ds, usw, 0.5, 5.0, 1.0)?;
        println!("sampling time {t}, window {usw} ({} days)", usw.len());
        println!("  demand forecast  {}", sketch(set.u_df.samples()));
        println!("  movement         {}", sketch(set.u_mm.samples()));
        println!("  supplier delay   {}", sketch(set.u_st.samples()));
        println!("  supplier qty     {}", sketch(set.u_sq.samples()));
        println!(
            "  delay percentiles: p50 = {} d, p100 = {} d; over-forecast share = {:.0}%",
            set.u_st.percentile(0.5),
            set.u_st.percentile(1.0),
            100.0 * set.u_df.samples().iter().filter(|&&s| s > 0.0).count() as f64
                / set.u_df.len() as f64
        );
        println!();
    }
    Ok(())
}
