use serde::{Deserialize, Serialize};

use super::backprop::{bptt_gradients, mse_loss};
use super::optim::{optimizer_step, OptimizerKind, OptimizerState};
use super::LstmNetwork;
use crate::error::{Error, Result};
use crate::ingest::WindowSet;
use crate::metrics::EvalReport;
use crate::rng::DEFAULT_INIT_SEED;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    /// Validation loss is recorded every this many epochs.
    pub validation_every: usize,
    /// Train/test RMSE and R² are recorded every this many epochs.
    pub test_every: usize,
    /// Seed for weight initialisation. Training itself does not shuffle.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            validation_every: 5,
            test_every: 10,
            seed: DEFAULT_INIT_SEED,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter("learning rate must be positive".into()));
        }
        if self.validation_every == 0 || self.test_every == 0 {
            return Err(Error::InvalidParameter("cadences must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationPoint {
    pub epoch: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub epoch: usize,
    pub train: EvalReport,
    pub test: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Training-set MSE before the first update.
    pub initial_loss: f64,
    /// Training-set MSE after each epoch.
    pub train_loss: Vec<f64>,
    pub validation: Vec<ValidationPoint>,
    #[serde(default)]
    pub test: Vec<EvalPoint>,
}

pub fn dataset_loss(net: &LstmNetwork, set: &WindowSet) -> Result<f64> {
    mse_loss(&net.predict(&set.inputs)?, &set.targets)
}

pub fn evaluate(net: &LstmNetwork, set: &WindowSet) -> Result<EvalReport> {
    EvalReport::compute(&net.predict(&set.inputs)?, &set.targets)
}

/// Mini-batch training in fixed window order. Validation and test sets are
/// only ever evaluated, never used for updates.
pub fn fit(
    mut net: LstmNetwork,
    train: &WindowSet,
    validation: &WindowSet,
    cfg: &TrainConfig,
    test: Option<&WindowSet>,
) -> Result<(LstmNetwork, TrainReport)> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("training set"));
    }
    for set in [Some(train), Some(validation), test].into_iter().flatten() {
        if set.lookback != net.config.lookback {
            return Err(Error::Dimension(format!(
                "windows use lookback {}, network expects {}",
                set.lookback, net.config.lookback
            )));
        }
    }

    let mut state = OptimizerState::new(cfg.optimizer, net.param_count());
    let mut report = TrainReport {
        initial_loss: dataset_loss(&net, train)?,
        train_loss: Vec::with_capacity(cfg.epochs),
        validation: Vec::new(),
        test: Vec::new(),
    };

    for epoch in 1..=cfg.epochs {
        for (inputs, targets) in train.batches(net.config.batch_size) {
            let batch = bptt_gradients(&net, inputs, targets)?;
            optimizer_step(&mut net.params, &batch.grads, &mut state, cfg.learning_rate)?;
        }
        report.train_loss.push(dataset_loss(&net, train)?);
        if epoch % cfg.validation_every == 0 && !validation.is_empty() {
            report.validation.push(ValidationPoint {
                epoch,
                loss: dataset_loss(&net, validation)?,
            });
        }
        if let Some(test) = test {
            if epoch % cfg.test_every == 0 && !test.is_empty() {
                report.test.push(EvalPoint {
                    epoch,
                    train: evaluate(&net, train)?,
                    test: evaluate(&net, test)?,
                });
            }
        }
    }
    Ok((net, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::make_windows;
    use crate::nn::{init_params, NetworkConfig};

    fn ramp_windows() -> WindowSet {
        let values: Vec<f64> = (0..120).map(|i| i as f64 / 119.0).collect();
        make_windows(&values, 3).unwrap()
    }

    #[test]
    fn cadences_and_determinism() {
        let set = ramp_windows();
        let cfg = TrainConfig {
            epochs: 20,
            learning_rate: 0.01,
            ..Default::default()
        };
        let net = init_params(NetworkConfig::default(), 42).unwrap();
        let (a, ra) = fit(net.clone(), &set, &set, &cfg, Some(&set)).unwrap();
        let (b, rb) = fit(net, &set, &set, &cfg, Some(&set)).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert_eq!(ra.train_loss.len(), 20);
        let val_epochs: Vec<usize> = ra.validation.iter().map(|p| p.epoch).collect();
        assert_eq!(val_epochs, vec![5, 10, 15, 20]);
        let test_epochs: Vec<usize> = ra.test.iter().map(|p| p.epoch).collect();
        assert_eq!(test_epochs, vec![10, 20]);
    }

    #[test]
    fn ramp_loss_drops_tenfold() {
        let set = ramp_windows();
        let cfg = TrainConfig {
            epochs: 100,
            learning_rate: 0.01,
            ..Default::default()
        };
        let net = init_params(NetworkConfig::default(), 42).unwrap();
        let (_, report) = fit(net, &set, &set, &cfg, None).unwrap();
        let last = *report.train_loss.last().unwrap();
        assert!(last < report.initial_loss / 10.0, "{} -> {last}", report.initial_loss);
    }

    #[test]
    fn rejects_empty_and_mismatched_sets() {
        let net = init_params(NetworkConfig::default(), 1).unwrap();
        let empty = WindowSet {
            lookback: 3,
            inputs: vec![],
            targets: vec![],
        };
        assert!(fit(net.clone(), &empty, &empty, &TrainConfig::default(), None).is_err());
        let other = make_windows(&[0.0, 0.1, 0.2, 0.5, 0.3], 2).unwrap();
        assert!(fit(net, &other, &other, &TrainConfig::default(), None).is_err());
    }
}
