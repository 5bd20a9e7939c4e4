//! Loading, validating, splitting, windowing and min-max scaling of daily
//! inflow records.

use std::io::{Read, Write};
use std::ops::Range;

use chrono::{Datelike, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DATE_FORMAT: &str = "%Y-%m-%d";

/// A gap-free daily inflow record (cusecs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    start_date: NaiveDate,
    values: Vec<f64>,
}

impl DailySeries {
    /// Builds a series, checking that every value is finite and non-negative.
    pub fn new(start_date: NaiveDate, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("daily series"));
        }
        for (i, &v) in values.iter().enumerate() {
            let date = start_date + chrono::Days::new(i as u64);
            if !v.is_finite() {
                return Err(Error::NonFiniteInflow(date));
            }
            if v < 0.0 {
                return Err(Error::NegativeInflow { date, value: v });
            }
        }
        Ok(Self { start_date, values })
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start_date
    }

    pub fn end_date(&self) -> NaiveDate {
        self.date_at(self.values.len() - 1)
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start_date + chrono::Days::new(index as u64)
    }

    /// Index of `date`, if it falls inside the series.
    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let offset = (date - self.start_date).num_days();
        (offset >= 0 && (offset as usize) < self.values.len()).then_some(offset as usize)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.values.len()).map(|i| self.date_at(i))
    }

    /// Sub-series over `range`; errors if the range is empty or out of bounds.
    pub fn slice(&self, range: Range<usize>) -> Result<DailySeries> {
        check_range(&range, self.values.len())?;
        Ok(DailySeries {
            start_date: self.date_at(range.start),
            values: self.values[range].to_vec(),
        })
    }
}

fn check_range(range: &Range<usize>, len: usize) -> Result<()> {
    if range.start >= range.end || range.end > len {
        return Err(Error::InvalidRange {
            start: range.start,
            end: range.end,
            len,
        });
    }
    Ok(())
}

/// Reads a `date,inflow` CSV. Lines starting with `#` are treated as comments.
pub fn load_daily_series<R: Read>(source: R) -> Result<DailySeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "date" || &headers[1] != "inflow" {
        if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
            return Err(Error::Empty("csv file"));
        }
        return Err(Error::BadHeader(headers.iter().collect::<Vec<_>>().join(",")));
    }

    let mut start_date = None;
    let mut expected: Option<NaiveDate> = None;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(Error::MalformedRow {
                line,
                reason: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&record[0], DATE_FORMAT).map_err(|e| {
            Error::MalformedRow {
                line,
                reason: format!("bad date `{}`: {e}", &record[0]),
            }
        })?;
        let value: f64 = record[1].parse().map_err(|_| Error::MalformedRow {
            line,
            reason: format!("bad inflow `{}`", &record[1]),
        })?;

        if let Some(want) = expected {
            if date > want {
                return Err(Error::Gap(want));
            }
            if date < want {
                return Err(Error::DuplicateDate(date));
            }
        } else {
            start_date = Some(date);
        }
        if !value.is_finite() {
            return Err(Error::NonFiniteInflow(date));
        }
        if value < 0.0 {
            return Err(Error::NegativeInflow { date, value });
        }
        values.push(value);
        expected = date.succ_opt();
    }

    match start_date {
        Some(start) => DailySeries::new(start, values),
        None => Err(Error::Empty("csv file")),
    }
}

/// Writes the `date,inflow` CSV. An optional comment is emitted as a leading
/// `# ...` line.
pub fn write_daily_series<W: Write>(
    series: &DailySeries,
    comment: Option<&str>,
    mut out: W,
) -> Result<()> {
    if let Some(comment) = comment {
        for line in comment.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    writeln!(out, "date,inflow")?;
    for (date, v) in series.dates().zip(series.values()) {
        writeln!(out, "{},{}", date.format(DATE_FORMAT), v)?;
    }
    Ok(())
}

/// Contiguous train / validation / test index ranges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: Range<usize>,
    pub validation: Range<usize>,
    pub test: Range<usize>,
}

/// Twelve years of training, the thirteenth year for validation, the rest
/// for testing.
pub fn split_series(series: &DailySeries) -> Result<SplitSpec> {
    split_by_years(series, 12, 1)
}

/// Calendar-year split measured from the series start date. Requires at least
/// one full year left over for the test range.
pub fn split_by_years(
    series: &DailySeries,
    train_years: u32,
    validation_years: u32,
) -> Result<SplitSpec> {
    if train_years == 0 || validation_years == 0 {
        return Err(Error::InvalidParameter(
            "train and validation spans must be at least one year".into(),
        ));
    }
    let start = series.start_date();
    let anniversary = |years: u32| -> Result<usize> {
        let date = start
            .checked_add_months(Months::new(12 * years))
            .ok_or_else(|| Error::InvalidParameter("date overflow".into()))?;
        Ok((date - start).num_days() as usize)
    };
    let train_end = anniversary(train_years)?;
    let val_end = anniversary(train_years + validation_years)?;
    let min_len = anniversary(train_years + validation_years + 1)?;
    if series.len() < min_len {
        return Err(Error::TooShort(format!(
            "{} days, need at least {} ({} full years)",
            series.len(),
            min_len,
            train_years + validation_years + 1
        )));
    }
    Ok(SplitSpec {
        train: 0..train_end,
        validation: train_end..val_end,
        test: val_end..series.len(),
    })
}

/// Min/max pair for `(x - min) / (max - min)` scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min_value: f64,
    pub max_value: f64,
}

impl ScalerParams {
    pub fn new(min_value: f64, max_value: f64) -> Result<Self> {
        if !min_value.is_finite() || !max_value.is_finite() {
            return Err(Error::NonFinite("scaler bounds"));
        }
        if max_value <= min_value {
            return Err(Error::DegenerateScaler {
                min: min_value,
                max: max_value,
            });
        }
        Ok(Self {
            min_value,
            max_value,
        })
    }

    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("scaler fit range"));
        }
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if min == max {
            return Err(Error::ConstantSeries("scaler fit range"));
        }
        Self::new(min, max)
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.min_value, self.max_value).map(|_| ())
    }

    pub fn span(&self) -> f64 {
        self.max_value - self.min_value
    }

    pub fn normalize(&self, x: f64) -> f64 {
        (x - self.min_value) / self.span()
    }

    pub fn denormalize(&self, v: f64) -> f64 {
        v * self.span() + self.min_value
    }
}

/// Min/max over `range` of the series only.
pub fn fit_scaler(series: &DailySeries, range: Range<usize>) -> Result<ScalerParams> {
    if range.start >= range.end {
        return Err(Error::Empty("scaler fit range"));
    }
    check_range(&range, series.len())?;
    ScalerParams::fit(&series.values()[range])
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSeries {
    pub values: Vec<f64>,
    pub scaler: ScalerParams,
}

/// Applies the scaler. Values outside the fitting range are not clamped.
pub fn normalize(series: &DailySeries, scaler: ScalerParams) -> Result<NormalizedSeries> {
    scaler.validate()?;
    Ok(NormalizedSeries {
        values: series.values().iter().map(|&x| scaler.normalize(x)).collect(),
        scaler,
    })
}

pub fn denormalize(values: &[f64], scaler: ScalerParams) -> Result<Vec<f64>> {
    scaler.validate()?;
    Ok(values.iter().map(|&v| scaler.denormalize(v)).collect())
}

/// Supervised pairs: each target preceded by its `lookback` inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    pub lookback: usize,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl WindowSet {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Consecutive batches of at most `size` windows, in order.
    pub fn batches(&self, size: usize) -> impl Iterator<Item = (&[Vec<f64>], &[f64])> {
        let size = size.max(1);
        self.inputs.chunks(size).zip(self.targets.chunks(size))
    }
}

pub fn make_windows(values: &[f64], lookback: usize) -> Result<WindowSet> {
    if lookback == 0 {
        return Err(Error::InvalidParameter("lookback must be at least 1".into()));
    }
    if lookback >= values.len() {
        return Err(Error::TooShort(format!(
            "lookback {lookback} needs more than {} values",
            values.len()
        )));
    }
    make_windows_for_targets(values, lookback, lookback..values.len())
}

/// Windows whose targets fall in `targets`; inputs may reach back before the
/// range start (e.g. test windows drawing their first inputs from the end of
/// the validation year). Targets closer than `lookback` to index 0 are skipped.
pub fn make_windows_for_targets(
    values: &[f64],
    lookback: usize,
    targets: Range<usize>,
) -> Result<WindowSet> {
    if lookback == 0 {
        return Err(Error::InvalidParameter("lookback must be at least 1".into()));
    }
    check_range(&targets, values.len())?;
    let first = targets.start.max(lookback);
    if first >= targets.end {
        return Err(Error::TooShort(format!(
            "no target in {}..{} has {lookback} preceding values",
            targets.start, targets.end
        )));
    }
    let inputs = (first..targets.end)
        .map(|t| values[t - lookback..t].to_vec())
        .collect();
    Ok(WindowSet {
        lookback,
        inputs,
        targets: values[first..targets.end].to_vec(),
    })
}

/// Year of the first day, used by callers that need calendar alignment.
pub fn first_year(series: &DailySeries) -> i32 {
    series.start_date().year()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn series_of_years(years: i32) -> DailySeries {
        let start = date(1999, 1, 1);
        let end = date(1999 + years, 1, 1);
        let n = (end - start).num_days() as usize;
        DailySeries::new(start, (0..n).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn loads_consecutive_rows() {
        let csv = "date,inflow\n1999-01-01,10\n1999-01-02,11.5\n1999-01-03,12\n";
        let s = load_daily_series(csv.as_bytes()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.start_date(), date(1999, 1, 1));
        assert_eq!(s.values(), &[10.0, 11.5, 12.0]);
    }

    #[test]
    fn accepts_crlf_and_comments() {
        let csv = "# seed=9001\r\ndate,inflow\r\n2000-02-28,1\r\n2000-02-29,2\r\n2000-03-01,3\r\n";
        let s = load_daily_series(csv.as_bytes()).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(s.end_date(), date(2000, 3, 1));
    }

    #[test]
    fn reports_gap() {
        let csv = "date,inflow\n1999-01-01,1\n1999-01-03,2\n";
        let err = load_daily_series(csv.as_bytes()).unwrap_err();
        assert_eq!(err.to_string(), "gap at 1999-01-02");
    }

    #[test]
    fn rejects_duplicate_date() {
        let csv = "date,inflow\n1999-01-01,1\n1999-01-01,2\n";
        assert!(matches!(
            load_daily_series(csv.as_bytes()),
            Err(Error::DuplicateDate(_))
        ));
    }

    #[test]
    fn rejects_negative_inflow() {
        let csv = "date,inflow\n1999-01-01,-5\n";
        let err = load_daily_series(csv.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("negative inflow"), "{err}");
    }

    #[test]
    fn rejects_non_finite_and_malformed() {
        let nan = "date,inflow\n1999-01-01,NaN\n";
        assert!(matches!(
            load_daily_series(nan.as_bytes()),
            Err(Error::NonFiniteInflow(_))
        ));
        let bad = "date,inflow\n1999-01-01,abc\n";
        assert!(matches!(
            load_daily_series(bad.as_bytes()),
            Err(Error::MalformedRow { .. })
        ));
        let bad_date = "date,inflow\n01/01/1999,3\n";
        assert!(matches!(
            load_daily_series(bad_date.as_bytes()),
            Err(Error::MalformedRow { .. })
        ));
    }

    #[test]
    fn rejects_empty_and_bad_header() {
        assert!(matches!(load_daily_series("".as_bytes()), Err(Error::Empty(_))));
        assert!(matches!(
            load_daily_series("date,inflow\n".as_bytes()),
            Err(Error::Empty(_))
        ));
        assert!(matches!(
            load_daily_series("day,flow\n1999-01-01,1\n".as_bytes()),
            Err(Error::BadHeader(_))
        ));
    }

    #[test]
    fn csv_write_then_load() {
        let s = DailySeries::new(date(2004, 2, 27), vec![1.25, 0.0, 3e5, 0.1]).unwrap();
        let mut buf = Vec::new();
        write_daily_series(&s, Some("seed=9001"), &mut buf).unwrap();
        let back = load_daily_series(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn twenty_year_split() {
        let s = series_of_years(20);
        let split = split_series(&s).unwrap();
        assert_eq!(split.train, 0..(date(2011, 1, 1) - date(1999, 1, 1)).num_days() as usize);
        assert_eq!(s.date_at(split.validation.start), date(2011, 1, 1));
        assert_eq!(s.date_at(split.test.start), date(2012, 1, 1));
        assert_eq!(split.test.end, s.len());
        // 2012..2018 are seven calendar years.
        assert_eq!(split.test.len(), (date(2019, 1, 1) - date(2012, 1, 1)).num_days() as usize);
        // leap years counted: 1999-2010 contains 2000, 2004, 2008.
        assert_eq!(split.train.len(), 12 * 365 + 3);
    }

    #[test]
    fn fourteen_year_minimum_split() {
        let s = series_of_years(14);
        let split = split_series(&s).unwrap();
        assert_eq!(split.validation.len(), 365);
        assert_eq!(split.test.len(), 366); // 2012 is a leap year
    }

    #[test]
    fn short_series_split_fails() {
        assert!(matches!(split_series(&series_of_years(10)), Err(Error::TooShort(_))));
        let almost = series_of_years(14);
        let almost = almost.slice(0..almost.len() - 1).unwrap();
        assert!(split_series(&almost).is_err());
    }

    #[test]
    fn normalize_endpoints() {
        let s = DailySeries::new(date(2000, 1, 1), vec![2.0, 4.0, 6.0]).unwrap();
        let scaler = fit_scaler(&s, 0..3).unwrap();
        let n = normalize(&s, scaler).unwrap();
        assert_eq!(n.values, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn constant_fit_fails() {
        let s = DailySeries::new(date(2000, 1, 1), vec![5.0, 5.0, 5.0]).unwrap();
        assert!(matches!(fit_scaler(&s, 0..3), Err(Error::ConstantSeries(_))));
        assert!(matches!(fit_scaler(&s, 1..1), Err(Error::Empty(_))));
        assert!(ScalerParams::new(5.0, 5.0).is_err());
    }

    #[test]
    fn fit_uses_only_range() {
        let s = DailySeries::new(date(2000, 1, 1), vec![3.0, 1.0, 2.0, 10.0]).unwrap();
        let full = fit_scaler(&s, 0..3).unwrap();
        assert_eq!((full.min_value, full.max_value), (1.0, 3.0));
        // test value above the training max extrapolates past 1.
        let n = normalize(&s, full).unwrap();
        assert_eq!(n.values[3], 4.5);
    }

    #[test]
    fn denormalize_examples() {
        let scaler = ScalerParams::new(2.0, 6.0).unwrap();
        assert_eq!(denormalize(&[0.0, 1.0, 0.5], scaler).unwrap(), vec![2.0, 6.0, 4.0]);
    }

    #[test]
    fn window_counts() {
        let w = make_windows(&[0.0; 5], 3).unwrap();
        assert_eq!(w.len(), 2);
        let w = make_windows(&[0.1, 0.2, 0.3, 0.4], 3).unwrap();
        assert_eq!(w.inputs, vec![vec![0.1, 0.2, 0.3]]);
        assert_eq!(w.targets, vec![0.4]);
        assert!(make_windows(&[0.0; 5], 10).is_err());
        assert!(make_windows(&[0.0; 5], 0).is_err());
    }

    #[test]
    fn windows_for_targets_borrow_context() {
        let values: Vec<f64> = (0..10).map(f64::from).collect();
        let w = make_windows_for_targets(&values, 3, 6..10).unwrap();
        assert_eq!(w.targets, vec![6.0, 7.0, 8.0, 9.0]);
        assert_eq!(w.inputs[0], vec![3.0, 4.0, 5.0]);
        let head = make_windows_for_targets(&values, 3, 0..5).unwrap();
        assert_eq!(head.targets, vec![3.0, 4.0]);
    }

    #[test]
    fn batches_keep_short_tail() {
        let values: Vec<f64> = (0..20).map(f64::from).collect();
        let w = make_windows(&values, 3).unwrap();
        let sizes: Vec<usize> = w.batches(5).map(|(x, _)| x.len()).collect();
        assert_eq!(sizes, vec![5, 5, 5, 2]);
    }
}
