//! Backpropagation through time for the stacked LSTM.
//!
//! Per-sample gradients are accumulated in sample order, so a batch always
//! reduces the same way and results are bit-reproducible.

use super::{LstmNetwork, ParamSet};
use crate::error::{Error, Result};

pub fn mse_loss(predicted: &[f64], target: &[f64]) -> Result<f64> {
    if predicted.len() != target.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: target.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::Empty("loss batch"));
    }
    Ok(predicted
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / predicted.len() as f64)
}

/// Batch loss together with its gradient for every parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchGradients {
    pub loss: f64,
    pub grads: ParamSet,
}

/// Exact gradient of the batch-mean squared error.
pub fn bptt_gradients(net: &LstmNetwork, inputs: &[Vec<f64>], targets: &[f64]) -> Result<BatchGradients> {
    if inputs.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: inputs.len(),
            right: targets.len(),
        });
    }
    if inputs.is_empty() {
        return Err(Error::Empty("gradient batch"));
    }
    let scale = 1.0 / inputs.len() as f64;
    let act = net.config.candidate_activation;
    let mut grads = net.params.zeros_like();
    let mut loss = 0.0;

    for (window, &target) in inputs.iter().zip(targets) {
        let trace = net.trace(window)?;
        let err = trace.output - target;
        loss += err * err * scale;
        let dy = 2.0 * err * scale;

        for (g, h) in grads.dense.weights.iter_mut().zip(&trace.top_h) {
            *g += dy * h;
        }
        grads.dense.bias += dy;

        let steps = window.len();
        // gradient flowing into each step's hidden output from above
        let mut dh_ext: Vec<Vec<f64>> = vec![Vec::new(); steps];
        let top = net.config.top_hidden();
        for v in dh_ext.iter_mut() {
            *v = vec![0.0; top];
        }
        dh_ext[steps - 1] = net.params.dense.weights.iter().map(|w| w * dy).collect();

        for (l, layer) in net.params.layers.iter().enumerate().rev() {
            let h = layer.hidden_size;
            let cols = h + layer.input_size;
            let caches = &trace.layers[l];
            let lgrads = &mut grads.layers[l];
            let mut dh_next = vec![0.0; h];
            let mut dc_next = vec![0.0; h];
            let mut dx_seq = vec![Vec::new(); steps];

            for t in (0..steps).rev() {
                let c = &caches[t];
                let mut da = [vec![0.0; h], vec![0.0; h], vec![0.0; h], vec![0.0; h]];
                for k in 0..h {
                    let dh = dh_ext[t][k] + dh_next[k];
                    let d_o = dh * c.tanh_c[k];
                    let dc = dc_next[k] + dh * c.o[k] * (1.0 - c.tanh_c[k] * c.tanh_c[k]);
                    let df = dc * c.c_prev[k];
                    let di = dc * c.g[k];
                    let dg = dc * c.i[k];
                    dc_next[k] = dc * c.f[k];
                    da[0][k] = df * c.f[k] * (1.0 - c.f[k]);
                    da[1][k] = di * c.i[k] * (1.0 - c.i[k]);
                    da[2][k] = dg * act.derivative_from_output(c.g[k]);
                    da[3][k] = d_o * c.o[k] * (1.0 - c.o[k]);
                }

                let mut dz = vec![0.0; cols];
                for ((gate, ggrad), da) in layer.gates().into_iter().zip(lgrads.gates_mut()).zip(&da) {
                    for r in 0..h {
                        let a = da[r];
                        ggrad.bias[r] += a;
                        let row = r * cols;
                        for col in 0..cols {
                            ggrad.weights[row + col] += a * c.z[col];
                            dz[col] += gate.weights[row + col] * a;
                        }
                    }
                }
                dh_next.copy_from_slice(&dz[..h]);
                dx_seq[t] = dz[h..].to_vec();
            }
            dh_ext = dx_seq;
        }
    }

    if !loss.is_finite() || grads.values().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    Ok(BatchGradients { loss, grads })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::rmse;
    use crate::nn::{init_params, NetworkConfig};
    use crate::rng::RngState;

    #[test]
    fn mse_examples() {
        assert_eq!(mse_loss(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
        assert_eq!(mse_loss(&[0.0; 4], &[1.0; 4]).unwrap(), 1.0);
        assert!(mse_loss(&[], &[]).is_err());
        assert!(mse_loss(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn rmse_is_sqrt_mse() {
        let mut rng = RngState::new(17);
        for _ in 0..100 {
            let n = 1 + (rng.next_u64() % 40) as usize;
            let a: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
            let m = mse_loss(&a, &b).unwrap();
            assert!((m.sqrt() - rmse(&a, &b).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_fit_has_zero_gradient() {
        let net = init_params(NetworkConfig::default(), 8).unwrap();
        let inputs = vec![vec![0.1, 0.2, 0.3], vec![0.5, 0.4, 0.6]];
        let targets = net.predict(&inputs).unwrap();
        let g = bptt_gradients(&net, &inputs, &targets).unwrap();
        assert_eq!(g.loss, 0.0);
        assert!(g.grads.values().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_batch_rejected() {
        let net = init_params(NetworkConfig::default(), 8).unwrap();
        assert!(bptt_gradients(&net, &[], &[]).is_err());
    }
}
