//! Render an observed record and a 30-day recursive forecast to SVG.
//!
//! ```bash
//! cargo run --release --example plot_series -- out.svg
//! ```

use chrono::NaiveDate;
use inflow::ingest::DailySeries;
use inflow::pipeline::{train_on_series, PipelineConfig};
use inflow::plot::{emit_plot, PlotSeries};
use inflow::rng::RngState;

fn main() -> inflow::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "forecast.svg".into());
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
    let n = (NaiveDate::from_ymd_opt(2014, 1, 1).unwrap() - start).num_days();
    let mut rng = RngState::new(2);
    let values: Vec<f64> = (0..n)
        .map(|t| 1000.0 + 800.0 * (2.0 * std::f64::consts::PI * (t - 105) as f64 / 365.0).sin() + 30.0 * rng.standard_normal())
        .collect();
    let series = DailySeries::new(start, values)?;
    let cfg = PipelineConfig {
        train_years: 12,
        ..PipelineConfig::default()
    };
    let model = train_on_series(&series, &cfg)?;

    let last_year = series.len() - 365;
    let history: Vec<f64> = series.values()[last_year..].to_vec();
    let lookback = model.net.config.lookback;
    let seed: Vec<f64> = history[history.len() - lookback..].iter().map(|&v| model.scaler.normalize(v)).collect();
    let forecast: Vec<f64> = model.net.rollout(&seed, 30)?.into_iter().map(|v| model.scaler.denormalize(v)).collect();

    let plots = [
        PlotSeries::new("observed", history),
        PlotSeries::new("30-day rollout", forecast).with_offset(365),
    ];
    emit_plot("Observed inflow and recursive forecast", &plots, std::path::Path::new(&out))?;
    println!("wrote {out}");
    Ok(())
}
