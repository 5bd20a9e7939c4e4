//! Split a daily inflow record 12/1/rest years and print descriptive
//! statistics for each part.
//!
//! ```bash
//! cargo run --example series_stats -- path/to/inflow.csv
//! ```
//!
//! Without an argument a 20-year synthetic monsoon record is used.

use std::fs::File;
use std::io::BufReader;

use chrono::NaiveDate;
use inflow::ingest::{load_daily_series, split_series, DailySeries};
use inflow::metrics::descriptive_stats;
use inflow::rng::RngState;

fn synthetic(years: i32) -> DailySeries {
    let start = NaiveDate::from_ymd_opt(1999, 1, 1).unwrap();
    let n = (NaiveDate::from_ymd_opt(1999 + years, 1, 1).unwrap() - start).num_days();
    let mut rng = RngState::new(1);
    let values = (0..n)
        .map(|t| {
            let season = (2.0 * std::f64::consts::PI * (t - 105) as f64 / 365.25).sin();
            (15000.0 + 12000.0 * season) * (0.15 * rng.standard_normal()).exp()
        })
        .collect();
    DailySeries::new(start, values).unwrap()
}

fn main() -> inflow::Result<()> {
    let series = match std::env::args().nth(1) {
        Some(path) => load_daily_series(BufReader::new(File::open(path)?))?,
        None => synthetic(20),
    };
    let split = split_series(&series)?;
    println!("{} .. {} ({} days)", series.start_date(), series.end_date(), series.len());
    for (name, range) in [("train", split.train), ("validation", split.validation), ("test", split.test)] {
        let from = series.date_at(range.start);
        let s = descriptive_stats(&series.values()[range])?;
        println!(
            "{name:<11} from {from}: n {:>5}  min {:>9.1}  max {:>9.1}  mean {:>9.3}  sd {:>9.3}  kurt {:>6.3}  skew {:>6.3}  r1..r3 {:.3} {:.3} {:.3}",
            s.n, s.min, s.max, s.mean, s.std_dev, s.kurtosis, s.skewness, s.r1, s.r2, s.r3
        );
    }
    Ok(())
}
