use invopt::backtest::{run_backtest, BacktestConfig};
use invopt::domain::{Day, DayRange};
use invopt::optimizer::ForwardSimConfig;
use invopt::synth::SynthSpec;
use invopt::uncertainty::UswMode;

fn main() {
    let span = DayRange::new(Day(0), Day(400));
    let ds = SynthSpec::standard("P", 33, span).generate();
    let cfg = BacktestConfig {
        period: DayRange::new(Day(240), Day(390)),
        frequency: 30,
        n_os: 10,
        fwd: ForwardSimConfig { n_realizations: 100, slp: 0.9, stp: 0.5, sl_min: ds.params.target_sl, max_iterations: 10, aggregation_percentile: 0.5 },
        usw_mode: UswMode::Validation,
        b_usw: 14, l_min_usw: 30, n_c: 5.0, n_u: 1.0, seed: 42,
    };
    let r = run_backtest(&ds, &cfg).unwrap();
    println!("day | nominal | std_arr | exp_arr | forecast_row_head");
    for off in 40..70 {
        let d = Day(240 + off);
        let row = ds.forecasts.row(d, 8);
        println!("{:>3} | {:>7.1} | {:>7.1} | {:>7.1} | {:?}", off,
            r.nominal.inventory.get(d), r.nominal.std_arrivals.get(d), r.nominal.exp_arrivals.get(d),
            row.iter().map(|v| *v as i64).collect::<Vec<_>>());
    }
}
