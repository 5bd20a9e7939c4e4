//! Descriptive statistics and forecast scores.
//!
//! Moments use population (divide-by-n) estimators and kurtosis is reported
//! as excess kurtosis. RMSE and R² are computed on whatever scale the caller
//! passes in; the pipeline always passes normalized values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_pair(predicted: &[f64], observed: &[f64]) -> Result<()> {
    if predicted.len() != observed.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: observed.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::Empty("metric input"));
    }
    if predicted.iter().chain(observed).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("metric input"));
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn rmse(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    check_pair(predicted, observed)?;
    let sse: f64 = predicted
        .iter()
        .zip(observed)
        .map(|(p, o)| (p - o) * (p - o))
        .sum();
    Ok((sse / predicted.len() as f64).sqrt())
}

/// Coefficient of determination, `1 - SS_res / SS_tot`.
pub fn r_squared(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    check_pair(predicted, observed)?;
    if observed.len() < 2 {
        return Err(Error::TooShort("r_squared needs at least 2 points".into()));
    }
    let obs_mean = mean(observed);
    let ss_tot: f64 = observed.iter().map(|o| (o - obs_mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ConstantSeries("observed values"));
    }
    let ss_res: f64 = predicted
        .iter()
        .zip(observed)
        .map(|(p, o)| (o - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Lag-`lag` autocorrelation normalised by the full-series sum of squares.
pub fn autocorrelation(series: &[f64], lag: usize) -> Result<f64> {
    if lag >= series.len() {
        return Err(Error::TooShort(format!(
            "lag {lag} needs more than {} values",
            series.len()
        )));
    }
    let m = mean(series);
    let denom: f64 = series.iter().map(|x| (x - m).powi(2)).sum();
    if denom == 0.0 {
        return Err(Error::ConstantSeries("autocorrelation input"));
    }
    let numer: f64 = series
        .iter()
        .zip(&series[lag..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum();
    Ok(numer / denom)
}

/// Summary statistics in the layout of a dataset-overview table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub kurtosis: f64,
    pub skewness: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

pub fn descriptive_stats(series: &[f64]) -> Result<SeriesStats> {
    if series.len() < 4 {
        return Err(Error::TooShort(format!(
            "descriptive statistics need at least 4 values, got {}",
            series.len()
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("statistics input"));
    }
    let n = series.len() as f64;
    let m = mean(series);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in series {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        min = min.min(x);
        max = max.max(x);
    }
    if m2 == 0.0 {
        return Err(Error::ConstantSeries("statistics input"));
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    Ok(SeriesStats {
        n: series.len(),
        min,
        max,
        mean: m,
        std_dev: m2.sqrt(),
        kurtosis: m4 / (m2 * m2) - 3.0,
        skewness: m3 / m2.powf(1.5),
        r1: autocorrelation(series, 1)?,
        r2: autocorrelation(series, 2)?,
        r3: autocorrelation(series, 3)?,
    })
}

/// Forecast quality on a set of paired predictions and observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rmse: f64,
    #[serde(rename = "r2")]
    pub r_squared: f64,
    pub n: usize,
}

impl EvalReport {
    pub fn compute(predicted: &[f64], observed: &[f64]) -> Result<Self> {
        Ok(Self {
            rmse: rmse(predicted, observed)?,
            r_squared: r_squared(predicted, observed)?,
            n: predicted.len(),
        })
    }
}
