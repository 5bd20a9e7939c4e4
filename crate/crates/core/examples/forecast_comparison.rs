//! Score a trained LSTM's one-day-ahead forecasts over the last year against
//! Thomas-Fiering (monthly and daily) and the 10-daily historical average.
//!
//! ```bash
//! cargo run --release --example forecast_comparison
//! ```

use chrono::NaiveDate;
use inflow::evaluation::{compare, eval_range};
use inflow::ingest::DailySeries;
use inflow::pipeline::{train_on_series, PipelineConfig};
use inflow::rng::{RngState, DEFAULT_GENERATION_SEED};

fn main() -> inflow::Result<()> {
    let start = NaiveDate::from_ymd_opt(1999, 1, 1).unwrap();
    let n = (NaiveDate::from_ymd_opt(2019, 1, 1).unwrap() - start).num_days();
    let mut rng = RngState::new(8);
    let mut wet = 0.0;
    let values = (0..n)
        .map(|t| {
            wet = 0.97 * wet + 0.04 * rng.standard_normal();
            let season = (2.0 * std::f64::consts::PI * (t - 105) as f64 / 365.25).sin();
            (15000.0 + 12000.0 * season) * wet.exp()
        })
        .collect();
    let series = DailySeries::new(start, values)?;
    let model = train_on_series(&series, &PipelineConfig::default())?;

    let window = eval_range(&series, NaiveDate::from_ymd_opt(2017, 5, 1), 365)?;
    let c = compare(&model.net, &model.scaler, &series, window, DEFAULT_GENERATION_SEED)?;
    println!("{} .. {} ({} days)", c.eval_start, c.eval_end, c.n_days);
    for (name, r) in [("LSTM daily", c.lstm_daily), ("TF monthly", c.tf_monthly), ("TF daily", c.tf_daily), ("10-daily avg", c.ten_daily)] {
        println!("{name:<13} rmse {:.4}  r2 {:>7.4}  n {}", r.rmse, r.r_squared, r.n);
    }
    Ok(())
}
