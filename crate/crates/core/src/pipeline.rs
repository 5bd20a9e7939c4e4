//! End-to-end training: split, scale, window, initialise, fit.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ingest::{
    fit_scaler, make_windows_for_targets, normalize, split_by_years, DailySeries, ScalerParams,
    SplitSpec, WindowSet,
};
use crate::nn::{fit, init_params, LstmNetwork, NetworkConfig, TrainConfig, TrainReport};

/// Which part of the series the min/max scaler is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScalerFit {
    /// Training range only; validation and test reuse it.
    #[default]
    Train,
    /// Whole series.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub network: NetworkConfig,
    pub train: TrainConfig,
    pub scaler_fit: ScalerFit,
    pub train_years: u32,
    pub validation_years: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            network: NetworkConfig::default(),
            train: TrainConfig::default(),
            scaler_fit: ScalerFit::Train,
            train_years: 12,
            validation_years: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub split: SplitSpec,
    pub scaler: ScalerParams,
    pub normalized: Vec<f64>,
    pub train: WindowSet,
    pub validation: WindowSet,
    pub test: WindowSet,
}

/// Splits, scales and windows a series. Validation and test windows may draw
/// their inputs from the days just before their range.
pub fn prepare(
    series: &DailySeries,
    split: SplitSpec,
    lookback: usize,
    scaler_fit: ScalerFit,
) -> Result<PreparedData> {
    let scaler = match scaler_fit {
        ScalerFit::Train => fit_scaler(series, split.train.clone())?,
        ScalerFit::Full => fit_scaler(series, 0..series.len())?,
    };
    let normalized = normalize(series, scaler)?.values;
    let train = make_windows_for_targets(&normalized, lookback, split.train.clone())?;
    let validation = make_windows_for_targets(&normalized, lookback, split.validation.clone())?;
    let test = make_windows_for_targets(&normalized, lookback, split.test.clone())?;
    Ok(PreparedData {
        split,
        scaler,
        normalized,
        train,
        validation,
        test,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub net: LstmNetwork,
    pub scaler: ScalerParams,
    pub data: PreparedData,
    pub report: TrainReport,
}

pub fn train_on_series(series: &DailySeries, cfg: &PipelineConfig) -> Result<TrainedModel> {
    let split = split_by_years(series, cfg.train_years, cfg.validation_years)?;
    train_with_split(series, split, cfg)
}

pub fn train_with_split(series: &DailySeries, split: SplitSpec, cfg: &PipelineConfig) -> Result<TrainedModel> {
    let data = prepare(series, split, cfg.network.lookback, cfg.scaler_fit)?;
    let net = init_params(cfg.network.clone(), cfg.train.seed)?;
    let (net, report) = fit(net, &data.train, &data.validation, &cfg.train, Some(&data.test))?;
    Ok(TrainedModel {
        net,
        scaler: data.scaler,
        data,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn series(years: i32) -> DailySeries {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
        let end = NaiveDate::from_ymd_opt(2000 + years, 1, 1).unwrap();
        let n = (end - start).num_days() as usize;
        let v = (0..n)
            .map(|i| 1000.0 + 800.0 * (2.0 * std::f64::consts::PI * i as f64 / 365.0).sin())
            .collect();
        DailySeries::new(start, v).unwrap()
    }

    #[test]
    fn prepare_covers_every_target() {
        let s = series(4);
        let split = split_by_years(&s, 2, 1).unwrap();
        let data = prepare(&s, split.clone(), 3, ScalerFit::Train).unwrap();
        assert_eq!(data.train.len(), split.train.len() - 3);
        assert_eq!(data.validation.len(), split.validation.len());
        assert_eq!(data.test.len(), split.test.len());
        assert_eq!(data.test.targets, data.normalized[split.test.clone()].to_vec());
        let train_vals = &data.normalized[split.train.clone()];
        assert!(train_vals.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn full_fit_spans_whole_series() {
        let s = series(4);
        let split = split_by_years(&s, 2, 1).unwrap();
        let data = prepare(&s, split, 3, ScalerFit::Full).unwrap();
        let lo = data.normalized.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = data.normalized.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((lo, hi), (0.0, 1.0));
    }
}
