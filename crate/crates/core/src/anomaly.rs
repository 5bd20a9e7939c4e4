//! Flood / drought flagging from a recursive LSTM forecast.
//!
//! The last `k` observed days are compared against a `k`-step rollout seeded
//! with the `lookback` days immediately before them. If the RMSE between the
//! two (in normalized units) exceeds `tau * rho` the tail is anomalous: a
//! flood when more water arrived than forecast, otherwise a drought.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{DailySeries, ScalerParams, WindowSet};
use crate::metrics::rmse;
use crate::nn::LstmNetwork;

pub const DEFAULT_K: usize = 7;
pub const DEFAULT_RHO: f64 = 2.0;
pub const DEFAULT_TAU: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalyConfig {
    pub k: usize,
    pub lookback: usize,
    pub rho: f64,
    pub tau: f64,
}

impl Default for AnomalyConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            lookback: 3,
            rho: DEFAULT_RHO,
            tau: DEFAULT_TAU,
        }
    }
}

impl AnomalyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if self.lookback == 0 {
            return Err(Error::InvalidParameter("lookback must be at least 1".into()));
        }
        if !(self.rho > 1.0) || !self.rho.is_finite() {
            return Err(Error::InvalidParameter(format!("rho must exceed 1, got {}", self.rho)));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {}", self.tau)));
        }
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        self.tau * self.rho
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnomalyKind {
    None,
    Flood,
    Drought,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalyVerdict {
    pub kind: AnomalyKind,
    pub observed_rmse: f64,
    pub predicted_sum: f64,
    pub observed_sum: f64,
    pub k: usize,
    pub rho: f64,
    pub tau: f64,
}

/// Runs detection on raw inflow. `scaler` must be the one fitted when the
/// network was trained.
pub fn detect(
    net: &LstmNetwork,
    ground_truth: &DailySeries,
    cfg: &AnomalyConfig,
    scaler: &ScalerParams,
) -> Result<AnomalyVerdict> {
    scaler.validate()?;
    let normalized: Vec<f64> = ground_truth.values().iter().map(|&x| scaler.normalize(x)).collect();
    detect_normalized(net, &normalized, cfg)
}

/// Detection on already-normalized values.
pub fn detect_normalized(net: &LstmNetwork, values: &[f64], cfg: &AnomalyConfig) -> Result<AnomalyVerdict> {
    cfg.validate()?;
    if cfg.lookback != net.config.lookback {
        return Err(Error::Dimension(format!(
            "anomaly lookback {} does not match network lookback {}",
            cfg.lookback, net.config.lookback
        )));
    }
    if net.params.values().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("network parameters"));
    }
    let need = cfg.k + cfg.lookback;
    if values.len() < need {
        return Err(Error::TooShort(format!(
            "anomaly detection needs {need} days, got {}",
            values.len()
        )));
    }
    let n = values.len();
    let observed = &values[n - cfg.k..];
    let seed = &values[n - need..n - cfg.k];
    let predicted = net.rollout(seed, cfg.k)?;
    let observed_rmse = rmse(&predicted, observed)?;
    let predicted_sum: f64 = predicted.iter().sum();
    let observed_sum: f64 = observed.iter().sum();

    let kind = if observed_rmse <= cfg.threshold() {
        AnomalyKind::None
    } else if predicted_sum < observed_sum {
        AnomalyKind::Flood
    } else {
        AnomalyKind::Drought
    };
    Ok(AnomalyVerdict {
        kind,
        observed_rmse,
        predicted_sum,
        observed_sum,
        k: cfg.k,
        rho: cfg.rho,
        tau: cfg.tau,
    })
}

/// Empirical `tau`: one-step RMSE of the network on held-out windows.
pub fn calibrate_tau(net: &LstmNetwork, validation: &WindowSet) -> Result<f64> {
    if validation.is_empty() {
        return Err(Error::Empty("validation windows"));
    }
    rmse(&net.predict(&validation.inputs)?, &validation.targets)
}
