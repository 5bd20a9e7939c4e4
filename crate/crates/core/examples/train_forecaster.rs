//! Train the default 245-parameter stacked LSTM on a synthetic record,
//! print the training report and round-trip the checkpoint.
//!
//! ```bash
//! cargo run --release --example train_forecaster
//! ```

use chrono::NaiveDate;
use inflow::ingest::DailySeries;
use inflow::nn::{load_checkpoint, param_count, save_checkpoint};
use inflow::pipeline::{train_on_series, PipelineConfig};
use inflow::rng::RngState;

fn main() -> inflow::Result<()> {
    let start = NaiveDate::from_ymd_opt(1999, 1, 1).unwrap();
    let n = (NaiveDate::from_ymd_opt(2019, 1, 1).unwrap() - start).num_days();
    let mut rng = RngState::new(3);
    let values = (0..n)
        .map(|t| {
            let season = (2.0 * std::f64::consts::PI * (t - 105) as f64 / 365.25).sin();
            (15000.0 + 12000.0 * season) * (0.1 * rng.standard_normal()).exp()
        })
        .collect();
    let series = DailySeries::new(start, values)?;

    let cfg = PipelineConfig::default();
    println!("network {:?}: {} parameters", cfg.network.hidden_sizes, param_count(&cfg.network));
    let model = train_on_series(&series, &cfg)?;
    println!("initial loss {:.5}", model.report.initial_loss);
    for v in &model.report.validation {
        if v.epoch % 20 == 0 {
            println!("epoch {:>3}: train loss {:.5}  validation loss {:.5}", v.epoch, model.report.train_loss[v.epoch - 1], v.loss);
        }
    }
    for p in &model.report.test {
        println!(
            "epoch {:>3}: train rmse {:.4} r2 {:.4} | test rmse {:.4} r2 {:.4}",
            p.epoch, p.train.rmse, p.train.r_squared, p.test.rmse, p.test.r_squared
        );
    }

    let bytes = save_checkpoint(&model.net, &model.scaler)?;
    let (net, scaler) = load_checkpoint(&bytes)?;
    assert_eq!(save_checkpoint(&net, &scaler)?, bytes);
    println!("checkpoint: {} bytes, scaler {:.1}..{:.1}", bytes.len(), scaler.min_value, scaler.max_value);
    Ok(())
}
