//! Helpers shared by integration tests.
#![allow(dead_code)]

use inflow::nn::{bptt_gradients, mse_loss, CandidateActivation, LstmNetwork, NetworkConfig};
use inflow::rng::RngState;

const STEP: f64 = 1e-5;

pub fn random_net(rng: &mut RngState, hidden: Vec<usize>, lookback: usize, act: CandidateActivation) -> LstmNetwork {
    let cfg = NetworkConfig {
        lookback,
        hidden_sizes: hidden,
        batch_size: 2,
        candidate_activation: act,
    };
    let mut net = LstmNetwork::zeros(cfg).unwrap();
    for v in net.params.values_mut() {
        *v = rng.uniform_range(-1.0, 1.0);
    }
    net
}

pub fn random_batch(rng: &mut RngState, lookback: usize, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let inputs = (0..n).map(|_| (0..lookback).map(|_| rng.uniform()).collect()).collect();
    let targets = (0..n).map(|_| rng.uniform()).collect();
    (inputs, targets)
}

fn loss_at(net: &LstmNetwork, flat: &[f64], inputs: &[Vec<f64>], targets: &[f64]) -> f64 {
    let mut probe = net.clone();
    probe.params.set_from_slice(flat).unwrap();
    mse_loss(&probe.predict(inputs).unwrap(), targets).unwrap()
}

/// Largest relative discrepancy between analytic and central-difference
/// gradients. Entries whose magnitude is below `floor` are compared on an
/// absolute scale of `floor`.
pub fn max_relative_error(net: &LstmNetwork, inputs: &[Vec<f64>], targets: &[f64], floor: f64) -> f64 {
    let analytic = bptt_gradients(net, inputs, targets).unwrap().grads.to_vec();
    let base = net.params.to_vec();
    let mut worst: f64 = 0.0;
    for (k, &a) in analytic.iter().enumerate() {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[k] += STEP;
        minus[k] -= STEP;
        let numeric = (loss_at(net, &plus, inputs, targets) - loss_at(net, &minus, inputs, targets)) / (2.0 * STEP);
        let denom = a.abs().max(numeric.abs()).max(floor);
        worst = worst.max((a - numeric).abs() / denom);
    }
    worst
}

pub const REL_TOL: f64 = 1e-5;
pub const FLOOR: f64 = 1e-5;
