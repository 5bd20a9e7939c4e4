//! Fit monthly and daily Thomas-Fiering models to a record and generate
//! synthetic years with the default seed.
//!
//! ```bash
//! cargo run --example synthetic_flows
//! ```

use chrono::NaiveDate;
use inflow::ingest::DailySeries;
use inflow::rng::{RngState, DEFAULT_GENERATION_SEED};
use inflow::thomas_fiering::{fit_daily, fit_monthly, fit_period_params, generate_daily, generate_monthly};

fn main() -> inflow::Result<()> {
    let start = NaiveDate::from_ymd_opt(1990, 1, 1).unwrap();
    let n = (NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() - start).num_days();
    let mut rng = RngState::new(5);
    let mut anomaly = 0.0;
    let values = (0..n)
        .map(|t| {
            anomaly = 0.95 * anomaly + 0.05 * rng.standard_normal();
            let season = (2.0 * std::f64::consts::PI * (t - 105) as f64 / 365.25).sin();
            (15000.0 + 12000.0 * season) * anomaly.exp()
        })
        .collect();
    let record = DailySeries::new(start, values)?;

    let monthly = fit_monthly(&record)?;
    let synthetic = generate_monthly(&monthly, 1000, DEFAULT_GENERATION_SEED)?;
    let refit = fit_period_params(&synthetic.flows)?;
    println!("month   fitted mean  synthetic mean   fitted beta  synthetic beta");
    for j in 0..12 {
        println!(
            "{:>5} {:>13.1} {:>15.1} {:>13.3} {:>15.3}",
            j + 1,
            monthly.means[j],
            refit.means[j],
            monthly.betas[j],
            refit.betas[j]
        );
    }

    let daily = fit_daily(&record)?;
    let year = generate_daily(&daily, 2021, 1, DEFAULT_GENERATION_SEED)?.to_daily_series()?;
    let peak = year.values().iter().cloned().fold(f64::MIN, f64::max);
    let total: f64 = year.values().iter().sum();
    println!("synthetic 2021: {} days, peak {peak:.0}, mean {:.0}", year.len(), total / year.len() as f64);
    Ok(())
}
