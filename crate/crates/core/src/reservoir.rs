//! Reservoir accounting: reservoir factor, release policy and rule-curve
//! checks. Volumes are unit-agnostic; callers keep them consistent.

use std::io::Read;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirAccount {
    pub available_storage: f64,
    pub total_inflow_remaining: f64,
    pub total_indent_remaining: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirFactor {
    pub factor: f64,
    /// Indents are scaled by the factor only when it is at most 1.
    pub effective: bool,
}

fn check_volume(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::NonFinite(name));
    }
    if v < 0.0 {
        return Err(Error::InvalidParameter(format!("{name} must be non-negative, got {v}")));
    }
    Ok(())
}

fn check_indent(indent: f64) -> Result<()> {
    check_volume("total indent", indent)?;
    if indent == 0.0 {
        return Err(Error::InvalidParameter("total indent must be positive".into()));
    }
    Ok(())
}

/// `(available storage + remaining inflow) / remaining indent`.
pub fn reservoir_factor(account: &ReservoirAccount) -> Result<ReservoirFactor> {
    check_volume("available storage", account.available_storage)?;
    check_volume("remaining inflow", account.total_inflow_remaining)?;
    check_indent(account.total_indent_remaining)?;
    let factor = (account.available_storage + account.total_inflow_remaining) / account.total_indent_remaining;
    Ok(ReservoirFactor {
        factor,
        effective: factor <= 1.0,
    })
}

/// Available storage divided by the remaining indent, taken literally. The
/// result is a dimensionless ratio; see [`daily_release_per_day`] for a
/// volume-per-day figure.
pub fn daily_release_from_storage(available_storage: f64, total_indent_remaining: f64) -> Result<f64> {
    check_volume("available storage", available_storage)?;
    check_indent(total_indent_remaining)?;
    Ok(available_storage / total_indent_remaining)
}

/// Available storage spread evenly over the remaining days (volume per day).
pub fn daily_release_per_day(available_storage: f64, remaining_days: u32) -> Result<f64> {
    check_volume("available storage", available_storage)?;
    if remaining_days == 0 {
        return Err(Error::InvalidParameter("remaining days must be positive".into()));
    }
    Ok(available_storage / f64::from(remaining_days))
}

/// Release from storage plus the forecast inflow for the day.
pub fn total_daily_release(release_from_storage: f64, predicted_inflow: f64) -> Result<f64> {
    check_volume("release from storage", release_from_storage)?;
    check_volume("predicted inflow", predicted_inflow)?;
    Ok(release_from_storage + predicted_inflow)
}

/// Calendar day without a year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MonthDay {
    pub month: u32,
    pub day: u32,
}

impl MonthDay {
    pub const fn new(month: u32, day: u32) -> Self {
        Self { month, day }
    }

    pub fn of(date: NaiveDate) -> Self {
        Self::new(date.month(), date.day())
    }
}

impl std::fmt::Display for MonthDay {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:02}-{:02}", self.month, self.day)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Violated when elevation > limit on any day up to and including the date.
    MustNotExceedBy,
    /// Violated when elevation > limit strictly before the date.
    MustNotExceedBefore,
    /// Violated when elevation >= limit strictly before the date.
    MustNotReachBefore,
    /// Violated when elevation > limit on any date.
    HardCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleConstraint {
    /// Ignored for [`Relation::HardCap`].
    #[serde(default)]
    pub date: Option<MonthDay>,
    pub elevation_ft: f64,
    pub relation: Relation,
}

/// Calendar-indexed elevation limits for the filling season. Dated
/// constraints apply from `season_start` up to their date; the hard cap
/// applies year-round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleCurve {
    pub season_start: MonthDay,
    pub constraints: Vec<RuleConstraint>,
}

impl Default for RuleCurve {
    /// Bhakra filling rules: at most El. 1650 ft by 31 July, not above
    /// 1670 ft before 15 August, 1680 ft not reached before 31 August, and
    /// 1680 ft (512.06 m) never exceeded.
    fn default() -> Self {
        let dated = |m, d, elevation_ft, relation| RuleConstraint {
            date: Some(MonthDay::new(m, d)),
            elevation_ft,
            relation,
        };
        Self {
            season_start: MonthDay::new(6, 1),
            constraints: vec![
                dated(7, 31, 1650.0, Relation::MustNotExceedBy),
                dated(8, 15, 1670.0, Relation::MustNotExceedBefore),
                dated(8, 31, 1680.0, Relation::MustNotReachBefore),
                RuleConstraint {
                    date: None,
                    elevation_ft: 1680.0,
                    relation: Relation::HardCap,
                },
            ],
        }
    }
}

impl RuleCurve {
    pub fn from_json<R: Read>(reader: R) -> Result<Self> {
        let curve: RuleCurve = serde_json::from_reader(reader)?;
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<()> {
        let mut last: Option<f64> = None;
        for c in &self.constraints {
            if !c.elevation_ft.is_finite() {
                return Err(Error::NonFinite("rule-curve elevation"));
            }
            if c.relation == Relation::HardCap {
                continue;
            }
            let date = c.date.ok_or_else(|| {
                Error::InvalidParameter(format!("{:?} constraint needs a date", c.relation))
            })?;
            if NaiveDate::from_ymd_opt(2000, date.month, date.day).is_none() {
                return Err(Error::InvalidParameter(format!("invalid date {date}")));
            }
            if let Some(prev) = last {
                if c.elevation_ft <= prev {
                    return Err(Error::InvalidParameter(
                        "dated elevations must be strictly increasing".into(),
                    ));
                }
            }
            last = Some(c.elevation_ft);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: RuleConstraint,
    pub elevation_ft: f64,
    pub message: String,
}

/// Every constraint of `curve` broken by `elevation_ft` on `date`.
pub fn check_rule_curve(date: NaiveDate, elevation_ft: f64, curve: &RuleCurve) -> Vec<Violation> {
    let today = MonthDay::of(date);
    let in_season = |until: MonthDay, inclusive: bool| {
        today >= curve.season_start && (today < until || (inclusive && today == until))
    };
    curve
        .constraints
        .iter()
        .filter(|c| {
            let limit = c.elevation_ft;
            match (c.relation, c.date) {
                (Relation::HardCap, _) => elevation_ft > limit,
                (Relation::MustNotExceedBy, Some(d)) => in_season(d, true) && elevation_ft > limit,
                (Relation::MustNotExceedBefore, Some(d)) => in_season(d, false) && elevation_ft > limit,
                (Relation::MustNotReachBefore, Some(d)) => in_season(d, false) && elevation_ft >= limit,
                (_, None) => false,
            }
        })
        .map(|c| Violation {
            constraint: c.clone(),
            elevation_ft,
            message: describe(c, elevation_ft),
        })
        .collect()
}

fn describe(c: &RuleConstraint, elevation: f64) -> String {
    let date = c.date.map(|d| d.to_string()).unwrap_or_default();
    match c.relation {
        Relation::HardCap => format!("El. {elevation} ft exceeds the hard cap of {} ft", c.elevation_ft),
        Relation::MustNotExceedBy => {
            format!("El. {elevation} ft exceeds {} ft on or before {date}", c.elevation_ft)
        }
        Relation::MustNotExceedBefore => {
            format!("El. {elevation} ft exceeds {} ft before {date}", c.elevation_ft)
        }
        Relation::MustNotReachBefore => {
            format!("El. {elevation} ft reaches {} ft before {date}", c.elevation_ft)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn account(s: f64, i: f64, d: f64) -> ReservoirAccount {
        ReservoirAccount {
            available_storage: s,
            total_inflow_remaining: i,
            total_indent_remaining: d,
        }
    }

    fn date(m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2019, m, d).unwrap()
    }

    #[test]
    fn factor_examples() {
        assert_eq!(
            reservoir_factor(&account(100.0, 100.0, 200.0)).unwrap(),
            ReservoirFactor { factor: 1.0, effective: true }
        );
        assert_eq!(reservoir_factor(&account(50.0, 50.0, 200.0)).unwrap().factor, 0.5);
        let f = reservoir_factor(&account(300.0, 100.0, 200.0)).unwrap();
        assert_eq!(f, ReservoirFactor { factor: 2.0, effective: false });
        assert!(reservoir_factor(&account(1.0, 1.0, 0.0)).is_err());
        assert!(reservoir_factor(&account(-1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn release_examples() {
        assert_eq!(daily_release_from_storage(1200.0, 400.0).unwrap(), 3.0);
        assert_eq!(daily_release_from_storage(0.0, 400.0).unwrap(), 0.0);
        assert_eq!(daily_release_from_storage(400.0, 400.0).unwrap(), 1.0);
        assert!(daily_release_from_storage(1.0, 0.0).is_err());
        assert_eq!(daily_release_per_day(1200.0, 240).unwrap(), 5.0);
        assert!(daily_release_per_day(1200.0, 0).is_err());
        assert_eq!(total_daily_release(3.0, 5.0).unwrap(), 8.0);
        assert_eq!(total_daily_release(0.0, 7.5).unwrap(), 7.5);
        assert_eq!(total_daily_release(7.5, 0.0).unwrap(), 7.5);
        assert!(total_daily_release(-1.0, 2.0).is_err());
    }

    #[test]
    fn rule_curve_examples() {
        let curve = RuleCurve::default();
        assert!(check_rule_curve(date(7, 31), 1649.0, &curve).is_empty());
        let v = check_rule_curve(date(7, 20), 1655.0, &curve);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint.elevation_ft, 1650.0);
        let v = check_rule_curve(date(8, 25), 1680.0, &curve);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint.relation, Relation::MustNotReachBefore);
        let v = check_rule_curve(date(12, 1), 1685.0, &curve);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint.relation, Relation::HardCap);
        // 1680 exactly is allowed from 31 August on
        assert!(check_rule_curve(date(8, 31), 1680.0, &curve).is_empty());
    }

    #[test]
    fn curve_json_roundtrip_and_validation() {
        let curve = RuleCurve::default();
        let json = serde_json::to_string(&curve).unwrap();
        assert_eq!(RuleCurve::from_json(json.as_bytes()).unwrap(), curve);
        let mut bad = curve.clone();
        bad.constraints[1].elevation_ft = 1600.0;
        let json = serde_json::to_string(&bad).unwrap();
        assert!(RuleCurve::from_json(json.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn factor_is_scale_free(
            s in 0.0f64..1e6, i in 0.0f64..1e6, d in 1.0f64..1e6, k in 1e-3f64..1e3,
        ) {
            let a = reservoir_factor(&account(s, i, d)).unwrap().factor;
            let b = reservoir_factor(&account(s * k, i * k, d * k)).unwrap().factor;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn total_release_commutes_and_is_monotone(a in 0.0f64..1e6, b in 0.0f64..1e6, e in 0.0f64..1e3) {
            prop_assert_eq!(total_daily_release(a, b).unwrap(), total_daily_release(b, a).unwrap());
            prop_assert!(total_daily_release(a + e, b).unwrap() >= total_daily_release(a, b).unwrap());
        }

        #[test]
        fn off_season_is_clear(ordinal in 0u32..365, elevation in 1000.0f64..=1680.0) {
            let d = NaiveDate::from_yo_opt(2019, ordinal + 1).unwrap();
            prop_assume!(d.month() >= 9 || d.month() <= 5);
            prop_assert!(check_rule_curve(d, elevation, &RuleCurve::default()).is_empty());
        }
    }
}
