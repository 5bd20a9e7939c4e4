//! Train on a synthetic record, calibrate tau on the validation year, then
//! run flood/drought detection on the unperturbed and perturbed last week.
//!
//! ```bash
//! cargo run --release --example detect_anomaly
//! ```

use chrono::NaiveDate;
use inflow::anomaly::{calibrate_tau, detect, AnomalyConfig};
use inflow::ingest::{split_by_years, DailySeries};
use inflow::pipeline::{train_with_split, PipelineConfig};
use inflow::rng::RngState;

fn main() -> inflow::Result<()> {
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
    let n = (NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() - start).num_days();
    let mut rng = RngState::new(11);
    let values = (0..n)
        .map(|t| 1000.0 + 800.0 * (2.0 * std::f64::consts::PI * (t - 105) as f64 / 365.0).sin() + 40.0 * rng.standard_normal())
        .collect();
    let series = DailySeries::new(start, values)?;
    let model = train_with_split(&series, split_by_years(&series, 7, 1)?, &PipelineConfig::default())?;

    let cfg = AnomalyConfig {
        tau: calibrate_tau(&model.net, &model.data.validation)?,
        ..AnomalyConfig::default()
    };
    println!("tau {:.4}, threshold {:.4}", cfg.tau, cfg.threshold());
    for factor in [1.0, 5.0, 0.1] {
        let mut v = series.values().to_vec();
        let len = v.len();
        for x in &mut v[len - cfg.k..] {
            *x *= factor;
        }
        let verdict = detect(&model.net, &DailySeries::new(start, v)?, &cfg, &model.scaler)?;
        println!(
            "last {} days x{factor:<4}: {:?} (rmse {:.4}, predicted {:.3}, observed {:.3})",
            cfg.k, verdict.kind, verdict.observed_rmse, verdict.predicted_sum, verdict.observed_sum
        );
    }
    Ok(())
}
