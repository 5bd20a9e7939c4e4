//! Thomas-Fiering lag-one Markov streamflow generator.
//!
//! Flows are standardized per period (`y = (x - mean_j) / sd_j`) and the
//! standardized process follows
//!
//! ```text
//! y[i][j] = beta_j * y_prev + sqrt(1 - beta_j^2) * Z
//! ```
//!
//! where `y_prev` is the preceding period (the last period of the previous
//! year when `j == 0`) and `Z` is a standard normal draw. Monthly models use
//! 12 periods; the daily variant uses 366 day-of-year slots with 29 February
//! sharing 28 February's parameters.

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::DailySeries;
use crate::rng::{NormalSource, RngState};

pub const MONTHLY_PERIODS: usize = 12;
pub const DAILY_PERIODS: usize = 366;
/// Zero-based day-of-year slot reserved for 29 February.
pub const LEAP_DAY_SLOT: usize = 59;

/// Per-period mean, standard deviation and lag-one correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodParams {
    pub period_count: usize,
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
    pub betas: Vec<f64>,
}

impl PeriodParams {
    pub fn validate(&self) -> Result<()> {
        let p = self.period_count;
        if p == 0 {
            return Err(Error::InvalidParameter("period_count must be positive".into()));
        }
        if self.means.len() != p || self.std_devs.len() != p || self.betas.len() != p {
            return Err(Error::Dimension(format!(
                "period_count {p} but means/std_devs/betas have {}/{}/{}",
                self.means.len(),
                self.std_devs.len(),
                self.betas.len()
            )));
        }
        if self.means.iter().chain(&self.std_devs).chain(&self.betas).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("period parameters"));
        }
        if let Some(j) = self.std_devs.iter().position(|&s| s <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "standard deviation of period {j} must be positive"
            )));
        }
        if let Some(j) = self.betas.iter().position(|b| b.abs() > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "|beta| of period {j} exceeds 1: {}",
                self.betas[j]
            )));
        }
        Ok(())
    }

    pub fn standardize(&self, flows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.map_cells(flows, |x, m, s| (x - m) / s)
    }

    fn map_cells(
        &self,
        rows: &[Vec<f64>],
        f: impl Fn(f64, f64, f64) -> f64,
    ) -> Result<Vec<Vec<f64>>> {
        rows.iter()
            .enumerate()
            .map(|(i, row)| {
                if row.len() != self.period_count {
                    return Err(Error::Dimension(format!(
                        "row {i} has {} periods, expected {}",
                        row.len(),
                        self.period_count
                    )));
                }
                Ok(row
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| f(v, self.means[j], self.std_devs[j]))
                    .collect())
            })
            .collect()
    }
}

fn pearson(pairs: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let (mut n, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for (x, y) in pairs.clone() {
        n += 1.0;
        sx += x;
        sy += y;
    }
    if n < 2.0 {
        return 0.0;
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in pairs {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Fits means, sample standard deviations and lag-one correlations to a
/// years x periods matrix of flows.
///
/// `beta_j` correlates period `j` with period `j - 1` of the same year; for
/// `j == 0` it pairs each year's first period with the previous year's last,
/// so it draws on one pair fewer.
pub fn fit_period_params(flows: &[Vec<f64>]) -> Result<PeriodParams> {
    if flows.len() < 2 {
        return Err(Error::TooShort(format!(
            "need at least 2 complete years, got {}",
            flows.len()
        )));
    }
    let periods = flows[0].len();
    if periods == 0 {
        return Err(Error::Empty("period matrix"));
    }
    if let Some(i) = flows.iter().position(|r| r.len() != periods) {
        return Err(Error::Dimension(format!(
            "year {i} has {} periods, expected {periods}",
            flows[i].len()
        )));
    }
    if flows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("flow matrix"));
    }

    let years = flows.len() as f64;
    let mut means = Vec::with_capacity(periods);
    let mut std_devs = Vec::with_capacity(periods);
    for j in 0..periods {
        let m = flows.iter().map(|r| r[j]).sum::<f64>() / years;
        let var = flows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / (years - 1.0);
        if var == 0.0 {
            return Err(Error::ConstantSeries("period column has zero variance"));
        }
        means.push(m);
        std_devs.push(var.sqrt());
    }

    let betas = (0..periods)
        .map(|j| {
            if j == 0 {
                pearson(flows.windows(2).map(|w| (w[1][0], w[0][periods - 1])))
            } else {
                pearson(flows.iter().map(|r| (r[j], r[j - 1])))
            }
        })
        .collect();

    Ok(PeriodParams {
        period_count: periods,
        means,
        std_devs,
        betas,
    })
}

/// Runs the standardized recursion over `schedule`, one list of period slots
/// per year, starting from `initial`.
fn run_recursion<N: NormalSource>(
    params: &PeriodParams,
    schedule: impl Iterator<Item = Vec<usize>>,
    initial: f64,
    noise: &mut N,
) -> Vec<Vec<f64>> {
    let mut prev = initial;
    schedule
        .map(|slots| {
            slots
                .into_iter()
                .map(|j| {
                    let beta = params.betas[j];
                    let z = noise.next_normal();
                    prev = beta * prev + (1.0 - beta * beta).sqrt() * z;
                    prev
                })
                .collect()
        })
        .collect()
}

/// Standardized flows for `n_years` full years of every period.
pub fn generate_standardized<N: NormalSource>(
    params: &PeriodParams,
    n_years: usize,
    initial: f64,
    noise: &mut N,
) -> Result<Vec<Vec<f64>>> {
    params.validate()?;
    let p = params.period_count;
    Ok(run_recursion(
        params,
        (0..n_years).map(|_| (0..p).collect()),
        initial,
        noise,
    ))
}

/// `x = mean_j + sd_j * y`, cell by cell.
pub fn destandardize(standardized: &[Vec<f64>], params: &PeriodParams) -> Result<Vec<Vec<f64>>> {
    params.map_cells(standardized, |y, m, s| m + s * y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resolution {
    Monthly,
    Daily,
}

/// Generated standardized and destandardized flows.
///
/// Monthly rows hold 12 values. Daily rows follow the calendar of their year
/// (365 or 366 values), so `start_year` fixes where leap days fall.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSeries {
    pub resolution: Resolution,
    pub start_year: i32,
    pub seed: u64,
    pub standardized: Vec<Vec<f64>>,
    pub flows: Vec<Vec<f64>>,
}

impl SyntheticSeries {
    pub fn n_years(&self) -> usize {
        self.flows.len()
    }

    /// Lays the flows out as a daily record starting on 1 January of
    /// `start_year`. Monthly values are repeated for every day of the month.
    /// Negative flows, which the Gaussian recursion can produce, are
    /// truncated to zero.
    pub fn to_daily_series(&self) -> Result<DailySeries> {
        if self.flows.is_empty() {
            return Err(Error::Empty("synthetic series"));
        }
        let mut values = Vec::new();
        for (offset, row) in self.flows.iter().enumerate() {
            let year = self.start_year + offset as i32;
            match self.resolution {
                Resolution::Daily => values.extend(row.iter().map(|v| v.max(0.0))),
                Resolution::Monthly => {
                    for (m, v) in row.iter().enumerate() {
                        let days = days_in_month(year, m as u32 + 1);
                        values.extend(std::iter::repeat_n(v.max(0.0), days));
                    }
                }
            }
        }
        DailySeries::new(jan_first(self.start_year)?, values)
    }
}

fn jan_first(year: i32) -> Result<NaiveDate> {
    NaiveDate::from_ymd_opt(year, 1, 1)
        .ok_or_else(|| Error::InvalidParameter(format!("year {year} out of range")))
}

pub fn is_leap_year(year: i32) -> bool {
    NaiveDate::from_ymd_opt(year, 2, 29).is_some()
}

pub fn days_in_month(year: i32, month: u32) -> usize {
    let next = if month == 12 {
        NaiveDate::from_ymd_opt(year + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(year, month + 1, 1)
    };
    let first = NaiveDate::from_ymd_opt(year, month, 1);
    match (first, next) {
        (Some(a), Some(b)) => (b - a).num_days() as usize,
        _ => 0,
    }
}

/// Day-of-year slot in the 366-slot layout; 29 February is slot 59 and every
/// later day of a non-leap year is shifted up by one.
pub fn day_slot(date: NaiveDate) -> usize {
    let ordinal = date.ordinal0() as usize;
    if !is_leap_year(date.year()) && ordinal >= LEAP_DAY_SLOT {
        ordinal + 1
    } else {
        ordinal
    }
}

fn calendar_slots(year: i32) -> Vec<usize> {
    (0..DAILY_PERIODS)
        .filter(|&s| s != LEAP_DAY_SLOT || is_leap_year(year))
        .collect()
}

/// Monthly synthetic flows with the recursion started at the long-run mean.
pub fn generate_monthly(params: &PeriodParams, n_years: usize, seed: u64) -> Result<SyntheticSeries> {
    generate_monthly_from(params, 1, n_years, seed)
}

pub fn generate_monthly_from(
    params: &PeriodParams,
    start_year: i32,
    n_years: usize,
    seed: u64,
) -> Result<SyntheticSeries> {
    if params.period_count != MONTHLY_PERIODS {
        return Err(Error::Dimension(format!(
            "monthly generation needs {MONTHLY_PERIODS} periods, got {}",
            params.period_count
        )));
    }
    let mut rng = RngState::new(seed);
    let standardized = generate_standardized(params, n_years, 0.0, &mut rng)?;
    let flows = destandardize(&standardized, params)?;
    Ok(SyntheticSeries {
        resolution: Resolution::Monthly,
        start_year,
        seed,
        standardized,
        flows,
    })
}

/// Daily synthetic flows on the calendar of `start_year..start_year+n_years`.
pub fn generate_daily(
    params: &PeriodParams,
    start_year: i32,
    n_years: usize,
    seed: u64,
) -> Result<SyntheticSeries> {
    let mut rng = RngState::new(seed);
    generate_daily_with(params, start_year, n_years, 0.0, &mut rng, seed)
}

pub fn generate_daily_with<N: NormalSource>(
    params: &PeriodParams,
    start_year: i32,
    n_years: usize,
    initial: f64,
    noise: &mut N,
    seed: u64,
) -> Result<SyntheticSeries> {
    if params.period_count != DAILY_PERIODS {
        return Err(Error::Dimension(format!(
            "daily generation needs {DAILY_PERIODS} periods, got {}",
            params.period_count
        )));
    }
    params.validate()?;
    jan_first(start_year)?;
    let schedules: Vec<Vec<usize>> = (0..n_years)
        .map(|k| calendar_slots(start_year + k as i32))
        .collect();
    let standardized = run_recursion(params, schedules.iter().cloned(), initial, noise);
    let flows = standardized
        .iter()
        .zip(&schedules)
        .map(|(row, slots)| {
            row.iter()
                .zip(slots)
                .map(|(&y, &j)| params.means[j] + params.std_devs[j] * y)
                .collect()
        })
        .collect();
    Ok(SyntheticSeries {
        resolution: Resolution::Daily,
        start_year,
        seed,
        standardized,
        flows,
    })
}

/// Whole calendar years covered by the series, as `(first_year, count)`.
fn complete_years(series: &DailySeries) -> (i32, usize) {
    let start = series.start_date();
    let end = series.end_date();
    let first = if start.ordinal0() == 0 { start.year() } else { start.year() + 1 };
    let last = if end.month() == 12 && end.day() == 31 { end.year() } else { end.year() - 1 };
    (first, (last - first + 1).max(0) as usize)
}

fn year_values(series: &DailySeries, year: i32) -> &[f64] {
    let a = series.index_of(NaiveDate::from_ymd_opt(year, 1, 1).unwrap()).unwrap();
    let b = series.index_of(NaiveDate::from_ymd_opt(year, 12, 31).unwrap()).unwrap();
    &series.values()[a..=b]
}

/// Mean daily inflow of each calendar month, one row per complete year.
pub fn monthly_matrix(series: &DailySeries) -> (i32, Vec<Vec<f64>>) {
    let (first, count) = complete_years(series);
    let rows = (0..count)
        .map(|k| {
            let year = first + k as i32;
            let values = year_values(series, year);
            let mut pos = 0;
            (1..=12)
                .map(|m| {
                    let n = days_in_month(year, m);
                    let mean = values[pos..pos + n].iter().sum::<f64>() / n as f64;
                    pos += n;
                    mean
                })
                .collect()
        })
        .collect();
    (first, rows)
}

/// Daily flows of each complete calendar year with 29 February removed,
/// giving 365 columns per row.
pub fn daily_matrix(series: &DailySeries) -> (i32, Vec<Vec<f64>>) {
    let (first, count) = complete_years(series);
    let rows = (0..count)
        .map(|k| {
            let year = first + k as i32;
            let values = year_values(series, year);
            values
                .iter()
                .enumerate()
                .filter(|&(i, _)| !(is_leap_year(year) && i == LEAP_DAY_SLOT))
                .map(|(_, &v)| v)
                .collect()
        })
        .collect();
    (first, rows)
}

pub fn fit_monthly(series: &DailySeries) -> Result<PeriodParams> {
    fit_period_params(&monthly_matrix(series).1)
}

/// 366-slot day-of-year parameters; 29 February copies 28 February.
pub fn fit_daily(series: &DailySeries) -> Result<PeriodParams> {
    let fitted = fit_period_params(&daily_matrix(series).1)?;
    let expand = |v: &[f64]| {
        let mut out = v.to_vec();
        out.insert(LEAP_DAY_SLOT, v[LEAP_DAY_SLOT - 1]);
        out
    };
    Ok(PeriodParams {
        period_count: DAILY_PERIODS,
        means: expand(&fitted.means),
        std_devs: expand(&fitted.std_devs),
        betas: expand(&fitted.betas),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::FixedNoise;

    fn flat_params(p: usize, beta: f64) -> PeriodParams {
        PeriodParams {
            period_count: p,
            means: vec![100.0; p],
            std_devs: vec![10.0; p],
            betas: vec![beta; p],
        }
    }

    #[test]
    fn perfect_correlation_gives_unit_beta() {
        // each period = previous period + 1, with a different start per year
        let starts = [3.0, 17.0, 5.0, 40.0, 11.0];
        let flows: Vec<Vec<f64>> = starts
            .iter()
            .enumerate()
            .map(|(i, s)| (0..12).map(|j| s + 12.0 * i as f64 * 7.0 + j as f64).collect())
            .collect();
        let params = fit_period_params(&flows).unwrap();
        for &b in &params.betas[1..] {
            assert!((b - 1.0).abs() < 1e-12, "{b}");
        }
    }

    #[test]
    fn single_year_rejected() {
        assert!(matches!(
            fit_period_params(&[vec![1.0; 12]]),
            Err(Error::TooShort(_))
        ));
    }

    #[test]
    fn zero_variance_period_rejected() {
        let flows = vec![vec![1.0, 2.0], vec![1.0, 3.0], vec![1.0, 5.0]];
        assert!(matches!(fit_period_params(&flows), Err(Error::ConstantSeries(_))));
    }

    #[test]
    fn forced_recursion_halves() {
        let params = flat_params(4, 0.5);
        let y = generate_standardized(&params, 2, 1.0, &mut FixedNoise::zeros()).unwrap();
        let flat: Vec<f64> = y.concat();
        let want: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(k)).collect();
        assert_eq!(flat, want);
    }

    #[test]
    fn zero_beta_passes_noise_through() {
        let params = flat_params(3, 0.0);
        let z = vec![0.3, -1.2, 2.5, 0.01, -0.7, 1.1];
        let y = generate_standardized(&params, 2, 5.0, &mut FixedNoise::new(z.clone())).unwrap();
        assert_eq!(y.concat(), z);
    }

    #[test]
    fn beta_above_one_rejected() {
        let params = flat_params(12, 1.5);
        assert!(generate_standardized(&params, 1, 0.0, &mut FixedNoise::zeros()).is_err());
    }

    #[test]
    fn seeded_generation_is_bit_identical() {
        let params = flat_params(12, 0.6);
        let a = generate_monthly(&params, 50, 9001).unwrap();
        let b = generate_monthly(&params, 50, 9001).unwrap();
        assert_eq!(a, b);
        let c = generate_monthly(&params, 50, 9002).unwrap();
        assert_ne!(a.flows, c.flows);
    }

    #[test]
    fn zero_years_is_empty() {
        let s = generate_monthly(&flat_params(12, 0.3), 0, 9001).unwrap();
        assert!(s.flows.is_empty());
        assert!(s.to_daily_series().is_err());
    }

    #[test]
    fn destandardize_examples() {
        let params = PeriodParams {
            period_count: 3,
            means: vec![1.0, 2.0, 3.0],
            std_devs: vec![0.5, 1.0, 2.0],
            betas: vec![0.0; 3],
        };
        assert_eq!(destandardize(&[vec![0.0; 3]], &params).unwrap(), vec![params.means.clone()]);
        assert_eq!(destandardize(&[vec![1.0; 3]], &params).unwrap(), vec![vec![1.5, 3.0, 5.0]]);
        assert!(destandardize(&[vec![1.0; 2]], &params).is_err());
    }

    #[test]
    fn daily_unit_beta_holds_start_value() {
        let params = flat_params(DAILY_PERIODS, 1.0);
        let s = generate_daily_with(&params, 2000, 2, 0.7, &mut FixedNoise::zeros(), 0).unwrap();
        assert_eq!(s.standardized[0].len(), 366);
        assert_eq!(s.standardized[1].len(), 365);
        assert!(s.standardized.iter().flatten().all(|&y| y == 0.7));
    }

    #[test]
    fn daily_generation_is_deterministic() {
        let params = flat_params(DAILY_PERIODS, 0.9);
        let a = generate_daily(&params, 1999, 3, 9001).unwrap();
        let b = generate_daily(&params, 1999, 3, 9001).unwrap();
        assert_eq!(a, b);
        let daily = a.to_daily_series().unwrap();
        assert_eq!(daily.len(), 365 + 366 + 365);
    }

    #[test]
    fn day_slots_skip_leap_day() {
        let d = |y, m, d| NaiveDate::from_ymd_opt(y, m, d).unwrap();
        assert_eq!(day_slot(d(2001, 2, 28)), 58);
        assert_eq!(day_slot(d(2001, 3, 1)), 60);
        assert_eq!(day_slot(d(2000, 2, 29)), 59);
        assert_eq!(day_slot(d(2000, 3, 1)), 60);
        assert_eq!(day_slot(d(2001, 12, 31)), 365);
    }

    #[test]
    fn matrices_use_complete_years() {
        let start = NaiveDate::from_ymd_opt(1999, 6, 1).unwrap();
        let n = (NaiveDate::from_ymd_opt(2003, 3, 1).unwrap() - start).num_days() as usize;
        let s = DailySeries::new(start, (0..n).map(|i| (i % 50) as f64).collect()).unwrap();
        let (first, monthly) = monthly_matrix(&s);
        assert_eq!(first, 2000);
        assert_eq!(monthly.len(), 3);
        let (_, daily) = daily_matrix(&s);
        assert!(daily.iter().all(|r| r.len() == 365));
    }

    #[test]
    fn daily_fit_copies_feb_28_into_leap_slot() {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
        let n = (NaiveDate::from_ymd_opt(2004, 1, 1).unwrap() - start).num_days() as usize;
        let mut rng = RngState::new(3);
        let values: Vec<f64> = (0..n).map(|_| 100.0 + 10.0 * rng.uniform()).collect();
        let s = DailySeries::new(start, values).unwrap();
        let p = fit_daily(&s).unwrap();
        assert_eq!(p.period_count, DAILY_PERIODS);
        assert_eq!(p.means[LEAP_DAY_SLOT], p.means[LEAP_DAY_SLOT - 1]);
        assert_eq!(p.betas[LEAP_DAY_SLOT], p.betas[LEAP_DAY_SLOT - 1]);
        p.validate().unwrap();
    }

    #[test]
    fn monthly_expansion_to_days() {
        let params = flat_params(12, 0.0);
        let s = generate_monthly_from(&params, 2001, 1, 9001).unwrap();
        let daily = s.to_daily_series().unwrap();
        assert_eq!(daily.len(), 365);
        assert_eq!(daily.values()[0], s.flows[0][0].max(0.0));
        assert_eq!(daily.values()[31], s.flows[0][1].max(0.0));
    }

    #[test]
    fn params_json_layout() {
        let json = serde_json::to_value(flat_params(2, 0.5)).unwrap();
        let keys: Vec<&String> = json.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 4);
        for k in ["period_count", "means", "std_devs", "betas"] {
            assert!(json.get(k).is_some(), "{k}");
        }
    }
}
