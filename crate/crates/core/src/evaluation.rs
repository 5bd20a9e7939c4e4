//! Side-by-side forecast comparison over an evaluation window: the LSTM's
//! one-day-ahead forecasts against Thomas-Fiering synthetic flows (monthly
//! and daily) and the historical 10-daily average.
//!
//! All baselines are fitted on the days before the window only, and every
//! score is computed on values normalized with the model's scaler.

use std::ops::Range;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{make_windows_for_targets, DailySeries, ScalerParams};
use crate::metrics::EvalReport;
use crate::nn::LstmNetwork;
use crate::thomas_fiering::{days_in_month, fit_daily, fit_monthly, generate_daily, generate_monthly_from};

/// Index of the 10-day bin (36 per year): days 1-10, 11-20, 21-end of each
/// month.
pub fn ten_day_bin(date: NaiveDate) -> usize {
    (date.month0() as usize) * 3 + ((date.day0() / 10).min(2) as usize)
}

/// Mean inflow of each 10-day bin over `history`.
pub fn ten_daily_means(history: &DailySeries) -> Result<[f64; 36]> {
    let mut sums = [0.0; 36];
    let mut counts = [0usize; 36];
    for (date, v) in history.dates().zip(history.values()) {
        let b = ten_day_bin(date);
        sums[b] += v;
        counts[b] += 1;
    }
    if let Some(b) = counts.iter().position(|&c| c == 0) {
        return Err(Error::TooShort(format!("no history for 10-day bin {b}")));
    }
    let mut means = [0.0; 36];
    for b in 0..36 {
        means[b] = sums[b] / counts[b] as f64;
    }
    Ok(means)
}

/// The historical 10-daily average used as a forecast for each day of `dates`.
pub fn ten_daily_forecast(history: &DailySeries, dates: impl Iterator<Item = NaiveDate>) -> Result<Vec<f64>> {
    let means = ten_daily_means(history)?;
    Ok(dates.map(|d| means[ten_day_bin(d)]).collect())
}

/// One-day-ahead normalized predictions and observations for targets in
/// `range`, using observed values as inputs.
pub fn lstm_one_step(
    net: &LstmNetwork,
    normalized: &[f64],
    range: Range<usize>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let windows = make_windows_for_targets(normalized, net.config.lookback, range)?;
    Ok((net.predict(&windows.inputs)?, windows.targets))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub eval_start: NaiveDate,
    pub eval_end: NaiveDate,
    pub n_days: usize,
    pub lstm_daily: EvalReport,
    pub tf_monthly: EvalReport,
    pub tf_daily: EvalReport,
    pub ten_daily: EvalReport,
    pub seed: u64,
}

/// Daily series of the last `days` days, or of an explicit date window.
pub fn eval_range(series: &DailySeries, start: Option<NaiveDate>, days: usize) -> Result<Range<usize>> {
    let begin = match start {
        Some(d) => series.index_of(d).ok_or_else(|| {
            Error::InvalidParameter(format!("evaluation start {d} lies outside the series"))
        })?,
        None => series.len().checked_sub(days).ok_or_else(|| {
            Error::TooShort(format!("series has {} days, evaluation needs {days}", series.len()))
        })?,
    };
    let end = begin + days;
    if days == 0 || end > series.len() {
        return Err(Error::InvalidRange {
            start: begin,
            end,
            len: series.len(),
        });
    }
    Ok(begin..end)
}

pub fn compare(
    net: &LstmNetwork,
    scaler: &ScalerParams,
    series: &DailySeries,
    range: Range<usize>,
    seed: u64,
) -> Result<Comparison> {
    scaler.validate()?;
    if range.start == 0 || range.end > series.len() || range.start >= range.end {
        return Err(Error::InvalidRange {
            start: range.start,
            end: range.end,
            len: series.len(),
        });
    }
    let history = series.slice(0..range.start)?;
    let window = series.slice(range.clone())?;
    let norm = |v: f64| scaler.normalize(v);
    let normalized: Vec<f64> = series.values().iter().map(|&v| norm(v)).collect();
    let observed: Vec<f64> = window.values().iter().map(|&v| norm(v)).collect();

    let (pred, obs) = lstm_one_step(net, &normalized, range.clone())?;
    let lstm_daily = EvalReport::compute(&pred, &obs)?;

    let start_year = window.start_date().year();
    let n_years = (window.end_date().year() - start_year + 1) as usize;

    // monthly: compare calendar months fully inside the window
    let monthly_params = fit_monthly(&history)?;
    let monthly = generate_monthly_from(&monthly_params, start_year, n_years, seed)?;
    let mut tf_m_pred = Vec::new();
    let mut tf_m_obs = Vec::new();
    for (k, row) in monthly.flows.iter().enumerate() {
        let year = start_year + k as i32;
        for (m, &flow) in row.iter().enumerate() {
            let month = m as u32 + 1;
            let first = NaiveDate::from_ymd_opt(year, month, 1).unwrap();
            let n = days_in_month(year, month);
            let (Some(a), Some(_)) = (window.index_of(first), window.index_of(first + chrono::Days::new(n as u64 - 1))) else {
                continue;
            };
            let mean = window.values()[a..a + n].iter().sum::<f64>() / n as f64;
            tf_m_pred.push(norm(flow.max(0.0)));
            tf_m_obs.push(norm(mean));
        }
    }
    if tf_m_obs.len() < 2 {
        return Err(Error::TooShort("evaluation window covers fewer than 2 whole months".into()));
    }
    let tf_monthly = EvalReport::compute(&tf_m_pred, &tf_m_obs)?;

    let daily_params = fit_daily(&history)?;
    let daily = generate_daily(&daily_params, start_year, n_years, seed)?.to_daily_series()?;
    let tf_d_pred: Vec<f64> = window
        .dates()
        .map(|d| daily.index_of(d).map(|i| norm(daily.values()[i])))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::InvalidParameter("synthetic daily flows do not cover the window".into()))?;
    let tf_daily = EvalReport::compute(&tf_d_pred, &observed)?;

    let ten: Vec<f64> = ten_daily_forecast(&history, window.dates())?
        .into_iter()
        .map(norm)
        .collect();
    let ten_daily = EvalReport::compute(&ten, &observed)?;

    Ok(Comparison {
        eval_start: window.start_date(),
        eval_end: window.end_date(),
        n_days: window.len(),
        lstm_daily,
        tf_monthly,
        tf_daily,
        ten_daily,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::NetworkConfig;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn seasonal(years: i32) -> DailySeries {
        let start = d(2000, 1, 1);
        let n = (d(2000 + years, 1, 1) - start).num_days() as usize;
        let values = (0..n)
            .map(|i| {
                let t = i as f64;
                1000.0 + 800.0 * (2.0 * std::f64::consts::PI * t / 365.25).sin() + 50.0 * (t * 1.7).sin()
            })
            .collect();
        DailySeries::new(start, values).unwrap()
    }

    #[test]
    fn bins() {
        assert_eq!(ten_day_bin(d(2001, 1, 1)), 0);
        assert_eq!(ten_day_bin(d(2001, 1, 10)), 0);
        assert_eq!(ten_day_bin(d(2001, 1, 11)), 1);
        assert_eq!(ten_day_bin(d(2001, 1, 31)), 2);
        assert_eq!(ten_day_bin(d(2001, 2, 28)), 5);
        assert_eq!(ten_day_bin(d(2001, 12, 31)), 35);
    }

    #[test]
    fn ten_daily_average_of_repeating_years() {
        let start = d(2001, 1, 1);
        let one_year: Vec<f64> = (0..365).map(|i| (i % 37) as f64).collect();
        let values = [one_year.clone(), one_year.clone()].concat();
        let history = DailySeries::new(start, values).unwrap();
        let means = ten_daily_means(&history).unwrap();
        let first_bin = one_year[..10].iter().sum::<f64>() / 10.0;
        assert_eq!(means[0], first_bin);
        assert!(ten_daily_means(&history.slice(0..100).unwrap()).is_err());
    }

    #[test]
    fn constant_network_memorises_constant_window() {
        let mut net = LstmNetwork::zeros(NetworkConfig::default()).unwrap();
        net.params.dense.bias = 0.4;
        let normalized = vec![0.4; 30];
        let (p, o) = lstm_one_step(&net, &normalized, 10..30).unwrap();
        assert_eq!(crate::metrics::rmse(&p, &o).unwrap(), 0.0);
    }

    #[test]
    fn comparison_runs_and_is_deterministic() {
        let s = seasonal(6);
        let scaler = ScalerParams::fit(s.values()).unwrap();
        let mut net = LstmNetwork::zeros(NetworkConfig::default()).unwrap();
        net.params.dense.bias = 0.5;
        let range = eval_range(&s, Some(d(2004, 5, 1)), 365).unwrap();
        let a = compare(&net, &scaler, &s, range.clone(), 9001).unwrap();
        let b = compare(&net, &scaler, &s, range, 9001).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_days, 365);
        assert_eq!(a.eval_end, d(2005, 4, 30));
        assert_eq!(a.tf_monthly.n, 12);
        // a seasonal climatology beats a flat forecast
        assert!(a.ten_daily.rmse < a.lstm_daily.rmse);
    }

    #[test]
    fn eval_range_bounds() {
        let s = seasonal(2);
        assert_eq!(eval_range(&s, None, 365).unwrap().end, s.len());
        assert!(eval_range(&s, Some(d(2001, 12, 1)), 365).is_err());
        assert!(eval_range(&s, Some(d(1990, 1, 1)), 10).is_err());
    }
}
