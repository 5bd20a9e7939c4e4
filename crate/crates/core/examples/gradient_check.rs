//! Compare BPTT gradients with central finite differences on a small random
//! two-layer LSTM.
//!
//! ```bash
//! cargo run --example gradient_check
//! ```

use inflow::nn::{bptt_gradients, mse_loss, LstmNetwork, NetworkConfig};
use inflow::rng::RngState;

fn main() -> inflow::Result<()> {
    let cfg = NetworkConfig {
        lookback: 4,
        hidden_sizes: vec![3, 2],
        batch_size: 3,
        ..NetworkConfig::default()
    };
    let mut rng = RngState::new(17);
    let mut net = LstmNetwork::zeros(cfg)?;
    for v in net.params.values_mut() {
        *v = rng.uniform_range(-1.0, 1.0);
    }
    let inputs: Vec<Vec<f64>> = (0..3).map(|_| (0..4).map(|_| rng.uniform()).collect()).collect();
    let targets: Vec<f64> = (0..3).map(|_| rng.uniform()).collect();

    let analytic = bptt_gradients(&net, &inputs, &targets)?;
    let flat = net.params.to_vec();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for (k, a) in analytic.grads.to_vec().into_iter().enumerate() {
        let mut probe = net.clone();
        let mut shifted = flat.clone();
        shifted[k] += h;
        probe.params.set_from_slice(&shifted)?;
        let up = mse_loss(&probe.predict(&inputs)?, &targets)?;
        shifted[k] -= 2.0 * h;
        probe.params.set_from_slice(&shifted)?;
        let down = mse_loss(&probe.predict(&inputs)?, &targets)?;
        let numeric = (up - down) / (2.0 * h);
        worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-5));
    }
    println!("loss {:.6}, {} parameters, max relative error {worst:.2e}", analytic.loss, flat.len());
    Ok(())
}
