//! Reservoir factor, daily release and rule-curve checks for a few
//! depletion- and filling-period situations.
//!
//! ```bash
//! cargo run --example reservoir_policy
//! ```

use chrono::NaiveDate;
use inflow::reservoir::{
    check_rule_curve, daily_release_from_storage, daily_release_per_day, reservoir_factor, total_daily_release,
    ReservoirAccount, RuleCurve,
};

fn main() -> inflow::Result<()> {
    for (storage, inflow, indent) in [(100.0, 100.0, 200.0), (50.0, 50.0, 200.0), (300.0, 100.0, 200.0)] {
        let f = reservoir_factor(&ReservoirAccount {
            available_storage: storage,
            total_inflow_remaining: inflow,
            total_indent_remaining: indent,
        })?;
        let note = if f.effective { "indents scaled" } else { "full indents" };
        println!("storage {storage:>5} inflow {inflow:>5} indent {indent:>5}: factor {:.2} ({note})", f.factor);
    }

    let per_day = daily_release_per_day(1200.0, 120)?;
    println!(
        "release from storage: quotient {:.2}, per day {per_day:.2}, with 5.0 forecast inflow {:.2}",
        daily_release_from_storage(1200.0, 400.0)?,
        total_daily_release(per_day, 5.0)?
    );

    let curve = RuleCurve::default();
    for (m, d, el) in [(7, 31, 1649.0), (7, 20, 1655.0), (8, 10, 1672.0), (8, 25, 1680.0), (9, 10, 1680.0), (12, 1, 1685.0)] {
        let date = NaiveDate::from_ymd_opt(2019, m, d).unwrap();
        let v = check_rule_curve(date, el, &curve);
        if v.is_empty() {
            println!("{date} El. {el}: ok");
        }
        for x in v {
            println!("{date} El. {el}: {}", x.message);
        }
    }
    Ok(())
}
