//! Stacked LSTM regressor for one-day-ahead inflow forecasting.
//!
//! Each window of `lookback` normalized values runs through every LSTM layer
//! from zero initial state. Lower layers feed their full hidden sequence to
//! the layer above; a dense head maps the top layer's final hidden vector to
//! a single prediction. Gradients are derived by hand for this topology (see
//! [`backprop`]).

pub mod backprop;
pub mod cell;
pub mod checkpoint;
pub mod optim;
pub mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngState;

pub use backprop::{bptt_gradients, mse_loss};
pub use cell::{lstm_cell_forward, CandidateActivation, CellState, GateCache, GateParams, LstmLayerParams};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use optim::{optimizer_step, OptimizerKind, OptimizerState};
pub use train::{fit, TrainConfig, TrainReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub lookback: usize,
    pub hidden_sizes: Vec<usize>,
    pub batch_size: usize,
    #[serde(default)]
    pub candidate_activation: CandidateActivation,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            lookback: 3,
            hidden_sizes: vec![4, 4],
            batch_size: 15,
            candidate_activation: CandidateActivation::Tanh,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lookback == 0 {
            return Err(Error::InvalidParameter("lookback must be at least 1".into()));
        }
        if self.hidden_sizes.is_empty() || self.hidden_sizes.contains(&0) {
            return Err(Error::InvalidParameter(
                "need at least one layer and every hidden size >= 1".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be at least 1".into()));
        }
        Ok(())
    }

    /// `(hidden, input)` of every LSTM layer; the series is univariate.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut input = 1;
        self.hidden_sizes
            .iter()
            .map(|&h| {
                let shape = (h, input);
                input = h;
                shape
            })
            .collect()
    }

    pub fn top_hidden(&self) -> usize {
        *self.hidden_sizes.last().unwrap_or(&0)
    }
}

/// Trainable parameters per layer, dense head last.
pub fn layer_param_counts(config: &NetworkConfig) -> Vec<usize> {
    let mut counts: Vec<usize> = config
        .layer_shapes()
        .into_iter()
        .map(|(h, d)| 4 * (h * (h + d) + h))
        .collect();
    counts.push(config.top_hidden() + 1);
    counts
}

pub fn param_count(config: &NetworkConfig) -> usize {
    layer_param_counts(config).iter().sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// All trainable values. Gradients share this layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub layers: Vec<LstmLayerParams>,
    pub dense: DenseParams,
}

impl ParamSet {
    pub fn zeros(config: &NetworkConfig) -> Self {
        Self {
            layers: config
                .layer_shapes()
                .into_iter()
                .map(|(h, d)| LstmLayerParams::zeros(h, d))
                .collect(),
            dense: DenseParams {
                weights: vec![0.0; config.top_hidden()],
                bias: 0.0,
            },
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.values_mut().for_each(|v| *v = 0.0);
        z
    }

    /// Parameters in serialization order: layers bottom-up, gates f, i, c, o,
    /// weights before biases, then dense weights and bias.
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.gates().into_iter().flat_map(|g| g.weights.iter().chain(&g.bias)))
            .chain(&self.dense.weights)
            .chain(std::iter::once(&self.dense.bias))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| {
                l.gates_mut()
                    .into_iter()
                    .flat_map(|g| g.weights.iter_mut().chain(g.bias.iter_mut()))
            })
            .chain(self.dense.weights.iter_mut())
            .chain(std::iter::once(&mut self.dense.bias))
    }

    pub fn len(&self) -> usize {
        self.values().count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.values().copied().collect()
    }

    pub fn set_from_slice(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: self.len(),
            });
        }
        for (dst, src) in self.values_mut().zip(values) {
            *dst = *src;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmNetwork {
    pub config: NetworkConfig,
    pub params: ParamSet,
}

/// Per-layer, per-step caches from a forward pass over one window.
pub(crate) struct ForwardTrace {
    pub layers: Vec<Vec<GateCache>>,
    pub top_h: Vec<f64>,
    pub output: f64,
}

impl LstmNetwork {
    /// A network with every parameter zero.
    pub fn zeros(config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        let params = ParamSet::zeros(&config);
        Ok(Self { config, params })
    }

    pub fn from_params(config: NetworkConfig, params: ParamSet) -> Result<Self> {
        config.validate()?;
        let shapes = config.layer_shapes();
        if params.layers.len() != shapes.len() {
            return Err(Error::Dimension(format!(
                "config has {} layers, params have {}",
                shapes.len(),
                params.layers.len()
            )));
        }
        for (layer, (h, d)) in params.layers.iter().zip(shapes) {
            if layer.hidden_size != h || layer.input_size != d {
                return Err(Error::Dimension(format!(
                    "layer is {}x{}, config expects {h}x{d}",
                    layer.hidden_size, layer.input_size
                )));
            }
            layer.check_shapes()?;
        }
        if params.dense.weights.len() != config.top_hidden() {
            return Err(Error::Dimension("dense head width".into()));
        }
        if params.values().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network parameters"));
        }
        Ok(Self { config, params })
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub(crate) fn trace(&self, window: &[f64]) -> Result<ForwardTrace> {
        if window.len() != self.config.lookback {
            return Err(Error::Dimension(format!(
                "window has {} values, lookback is {}",
                window.len(),
                self.config.lookback
            )));
        }
        let act = self.config.candidate_activation;
        let mut sequence: Vec<Vec<f64>> = window.iter().map(|&v| vec![v]).collect();
        let mut layers = Vec::with_capacity(self.params.layers.len());
        for layer in &self.params.layers {
            let mut state = CellState::zeros(layer.hidden_size);
            let mut caches = Vec::with_capacity(sequence.len());
            let mut outputs = Vec::with_capacity(sequence.len());
            for x in &sequence {
                let (next, cache) = lstm_cell_forward(layer, act, x, &state)?;
                outputs.push(next.h.clone());
                caches.push(cache);
                state = next;
            }
            layers.push(caches);
            sequence = outputs;
        }
        let top_h = sequence.pop().unwrap_or_default();
        let dense = &self.params.dense;
        let output = dense.bias + dense.weights.iter().zip(&top_h).map(|(w, h)| w * h).sum::<f64>();
        Ok(ForwardTrace {
            layers,
            top_h,
            output,
        })
    }

    /// Prediction for one window of `lookback` values.
    pub fn forward(&self, window: &[f64]) -> Result<f64> {
        Ok(self.trace(window)?.output)
    }

    /// Predictions for a batch of windows, in order.
    pub fn predict(&self, windows: &[Vec<f64>]) -> Result<Vec<f64>> {
        windows.iter().map(|w| self.forward(w)).collect()
    }

    /// Recursive `steps`-ahead forecast: each prediction is appended to the
    /// window and the oldest value dropped.
    pub fn rollout(&self, seed_window: &[f64], steps: usize) -> Result<Vec<f64>> {
        if seed_window.len() != self.config.lookback {
            return Err(Error::Dimension(format!(
                "seed window has {} values, lookback is {}",
                seed_window.len(),
                self.config.lookback
            )));
        }
        let mut window = seed_window.to_vec();
        let mut out = Vec::with_capacity(steps);
        for _ in 0..steps {
            let next = self.forward(&window)?;
            window.remove(0);
            window.push(next);
            out.push(next);
        }
        Ok(out)
    }
}

/// Glorot-uniform weights (fan-in `hidden + input`, fan-out `hidden` for each
/// gate), zero biases except forget-gate biases of 1, zero dense bias.
pub fn init_params(config: NetworkConfig, seed: u64) -> Result<LstmNetwork> {
    config.validate()?;
    let mut rng = RngState::new(seed);
    let mut params = ParamSet::zeros(&config);
    for layer in &mut params.layers {
        let (h, d) = (layer.hidden_size, layer.input_size);
        let limit = glorot_limit(h + d, h);
        for gate in layer.gates_mut() {
            for w in &mut gate.weights {
                *w = rng.uniform_range(-limit, limit);
            }
        }
        layer.forget.bias.fill(1.0);
    }
    let limit = glorot_limit(config.top_hidden(), 1);
    for w in &mut params.dense.weights {
        *w = rng.uniform_range(-limit, limit);
    }
    Ok(LstmNetwork { config, params })
}

pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_topology_has_245_parameters() {
        let cfg = NetworkConfig::default();
        assert_eq!(layer_param_counts(&cfg), vec![96, 144, 5]);
        assert_eq!(param_count(&cfg), 245);
        assert_eq!(init_params(cfg, 1).unwrap().param_count(), 245);
    }

    #[test]
    fn single_unit_count() {
        let cfg = NetworkConfig {
            hidden_sizes: vec![1],
            ..Default::default()
        };
        // four gates of 1x2 weights plus a bias, dense 1 weight plus bias
        assert_eq!(param_count(&cfg), 4 * (2 + 1) + 2);
        assert_eq!(ParamSet::zeros(&cfg).len(), 14);
    }

    #[test]
    fn zero_network_outputs_dense_bias() {
        let mut net = LstmNetwork::zeros(NetworkConfig::default()).unwrap();
        assert_eq!(net.forward(&[0.1, 0.5, 0.9]).unwrap(), 0.0);
        net.params.dense.bias = 0.25;
        assert_eq!(net.forward(&[3.0, -1.0, 0.0]).unwrap(), 0.25);
        assert_eq!(net.rollout(&[0.1, 0.2, 0.3], 4).unwrap(), vec![0.25; 4]);
        assert!(net.rollout(&[0.1, 0.2, 0.3], 0).unwrap().is_empty());
    }

    #[test]
    fn zero_dense_weights_ignore_input() {
        let mut net = init_params(NetworkConfig::default(), 5).unwrap();
        net.params.dense.weights.fill(0.0);
        net.params.dense.bias = 0.1;
        let a = net.forward(&[0.0, 0.0, 0.0]).unwrap();
        let b = net.forward(&[1.0, 0.3, 0.7]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rollout_first_step_is_forward() {
        let net = init_params(NetworkConfig::default(), 11).unwrap();
        let w = [0.2, 0.4, 0.3];
        assert_eq!(net.rollout(&w, 1).unwrap(), vec![net.forward(&w).unwrap()]);
        let two = net.rollout(&w, 2).unwrap();
        assert_eq!(two[1], net.forward(&[0.4, 0.3, two[0]]).unwrap());
    }

    #[test]
    fn wrong_window_length_rejected() {
        let net = init_params(NetworkConfig::default(), 1).unwrap();
        assert!(net.forward(&[0.1, 0.2]).is_err());
        assert!(net.rollout(&[0.1], 3).is_err());
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let cfg = NetworkConfig::default();
        let a = init_params(cfg.clone(), 42).unwrap();
        let b = init_params(cfg.clone(), 42).unwrap();
        let bits = |n: &LstmNetwork| n.params.values().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&init_params(cfg, 43).unwrap()));
        for layer in &a.params.layers {
            let limit = glorot_limit(layer.hidden_size + layer.input_size, layer.hidden_size);
            for g in layer.gates() {
                assert!(g.weights.iter().all(|w| w.abs() <= limit));
            }
            assert!(layer.forget.bias.iter().all(|&b| b == 1.0));
            assert!(layer.input.bias.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn flat_roundtrip() {
        let net = init_params(NetworkConfig::default(), 3).unwrap();
        let flat = net.params.to_vec();
        let mut other = net.params.zeros_like();
        other.set_from_slice(&flat).unwrap();
        assert_eq!(other, net.params);
        assert!(other.set_from_slice(&flat[1..]).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = NetworkConfig {
            lookback: 0,
            ..Default::default()
        };
        assert!(init_params(bad, 1).is_err());
        let bad = NetworkConfig {
            hidden_sizes: vec![4, 0],
            ..Default::default()
        };
        assert!(LstmNetwork::zeros(bad).is_err());
    }
}
