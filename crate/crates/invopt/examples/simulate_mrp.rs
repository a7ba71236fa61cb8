//! Deterministic safety-stock MRP walkthrough: the three planning phases,
//! order cancellation, lot-size rules and safety time.
//!
//! Run with: cargo run -p invopt --example simulate_mrp

use invopt::domain::PlanningParams;
use invopt::mrp::{apply_safety_time, cancel_orders, run_mrp, MrpInput};

fn params(h: i64, lt: i64, elt: i64, ptf: i64, moq: f64, rv: f64) -> PlanningParams {
    PlanningParams {
        sku_id: "DEMO".into(),
        lead_time: lt,
        expedited_lead_time: elt,
        ptf,
        moq,
        rounding_value: rv,
        holding_cost: 1.0,
        order_cost: 0.0,
        target_sl: 1.0,
        horizon: h,
        seeding_window: lt,
    }
}

fn print_run(label: &str, input: &MrpInput) {
    let out = run_mrp(input);
    println!("--- {label}");
    println!("  day        : {}", (0..input.forecast.len()).map(|i| format!("{i:>6}")).collect::<String>());
    println!("  forecast   : {}", input.forecast.iter().map(|v| format!("{v:>6.1}")).collect::<String>());
    println!("  std arrive : {}", out.std_arrivals.iter().map(|v| format!("{v:>6.1}")).collect::<String>());
    println!("  exp arrive : {}", out.exp_arrivals.iter().map(|v| format!("{v:>6.1}")).collect::<String>());
    println!("  projected  : {}", out.projected.iter().map(|v| format!("{v:>6.1}")).collect::<String>());
    for o in &out.placed {
        println!(
        "  placed {} order: qty {:.1} arriving day {}",
            if o.expedited { "expedited" } else { "standard " },
            o.quantity,
            o.arrival
        );
    }
    println!();
}

fn main() {
    // Inventory drains by 2/day from 10; the first standard order can only
    // arrive after the lead time, landing exactly when the level would go
    // below the (zero) safety stock.
    print_run(
        "steady drain, lead time 3, expedited lead time 1",
        &MrpInput {
            starting_inventory: 10.0,
            forecast: vec![2.0; 6],
            std_arrivals: vec![0.0; 6],
            exp_arrivals: vec![0.0; 6],
            params: params(6, 3, 1, 0, 0.0, 1.0),
            ssv: 0.0,
        },
    );

    // Starting with one unit and demand of 2/day: day 1 goes negative
    // (inside the expedited lead time nothing can be done), then an
    // expedited top-up restores the level to zero.
    print_run(
        "expedited top-up inside the lead time",
        &MrpInput {
            starting_inventory: 1.0,
            forecast: vec![2.0; 6],
            std_arrivals: vec![0.0; 6],
            exp_arrivals: vec![0.0; 6],
            params: params(6, 3, 1, 0, 0.0, 1.0),
            ssv: 0.0,
        },
    );

    // Minimum order quantity 5 with lot increments of 3: a deficit of 10
    // rounds up to an 11-unit order.
    print_run(
        "lot rules: moq 5, rounding value 3",
        &MrpInput {
            starting_inventory: 0.0,
            forecast: vec![0.0, 0.0, 10.0, 0.0, 0.0],
            std_arrivals: vec![0.0; 5],
            exp_arrivals: vec![0.0; 5],
            params: params(5, 2, 0, 0, 5.0, 3.0),
            ssv: 0.0,
        },
    );

    // Cancellation pre-pass: surplus arrivals between the planning time
    // fence and the lead time are trimmed back-to-front.
    let sa = vec![0.0, 5.0, 4.0, 3.0];
    let trimmed = cancel_orders(10.0, &sa, &[0.0; 4], &[2.0; 4], 1, 3, 0.0);
    println!("--- cancellation: ptf 1, lead time 3, start 10, demand 2/day");
    println!("  booked std arrivals : {sa:?}");
    println!("  after cancellation  : {trimmed:?}");
    println!();

    // Safety time presents demand to the planner early, so coverage
    // arrives that many days before it is needed.
    let row = vec![0.0, 0.0, 4.0, 0.0];
    println!("--- safety time shifts demand earlier");
    println!("  raw row       : {row:?}");
    println!("  shifted st=2  : {:?}", apply_safety_time(&row, 2));
}
