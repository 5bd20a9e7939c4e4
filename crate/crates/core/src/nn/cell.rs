use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Activation applied to the candidate cell update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateActivation {
    /// Standard LSTM candidate, `tanh`.
    #[default]
    Tanh,
    /// Logistic candidate, as some write-ups print it. Restricts the
    /// candidate to (0, 1).
    Sigmoid,
}

impl CandidateActivation {
    pub(crate) fn apply(self, x: f64) -> f64 {
        match self {
            Self::Tanh => x.tanh(),
            Self::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative expressed through the activation output.
    pub(crate) fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Self::Tanh => 1.0 - y * y,
            Self::Sigmoid => y * (1.0 - y),
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Weights and bias of one gate. `weights` is `hidden x (hidden + input)`,
/// row-major, acting on `[h_prev, x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl GateParams {
    pub fn zeros(hidden: usize, input: usize) -> Self {
        Self {
            weights: vec![0.0; hidden * (hidden + input)],
            bias: vec![0.0; hidden],
        }
    }

    /// `W . z + b`
    fn affine(&self, z: &[f64]) -> Vec<f64> {
        let cols = z.len();
        self.bias
            .iter()
            .enumerate()
            .map(|(r, b)| {
                let row = &self.weights[r * cols..(r + 1) * cols];
                b + row.iter().zip(z).map(|(w, x)| w * x).sum::<f64>()
            })
            .collect()
    }
}

/// One LSTM layer. Gates are stored in the order forget, input, candidate,
/// output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmLayerParams {
    pub hidden_size: usize,
    pub input_size: usize,
    pub forget: GateParams,
    pub input: GateParams,
    pub candidate: GateParams,
    pub output: GateParams,
}

impl LstmLayerParams {
    pub fn zeros(hidden_size: usize, input_size: usize) -> Self {
        let g = GateParams::zeros(hidden_size, input_size);
        Self {
            hidden_size,
            input_size,
            forget: g.clone(),
            input: g.clone(),
            candidate: g.clone(),
            output: g,
        }
    }

    pub fn gates(&self) -> [&GateParams; 4] {
        [&self.forget, &self.input, &self.candidate, &self.output]
    }

    pub fn gates_mut(&mut self) -> [&mut GateParams; 4] {
        [
            &mut self.forget,
            &mut self.input,
            &mut self.candidate,
            &mut self.output,
        ]
    }

    pub fn param_count(&self) -> usize {
        4 * (self.hidden_size * (self.hidden_size + self.input_size) + self.hidden_size)
    }

    pub fn check_shapes(&self) -> Result<()> {
        let (h, d) = (self.hidden_size, self.input_size);
        if h == 0 || d == 0 {
            return Err(Error::Dimension("layer sizes must be positive".into()));
        }
        for g in self.gates() {
            if g.weights.len() != h * (h + d) || g.bias.len() != h {
                return Err(Error::Dimension(format!(
                    "gate expects {}x{} weights and {h} biases, found {} and {}",
                    h,
                    h + d,
                    g.weights.len(),
                    g.bias.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl CellState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Everything one step stores for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct GateCache {
    /// `[h_prev, x]`
    pub z: Vec<f64>,
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

/// One LSTM step:
///
/// ```text
/// f = sigma(W_f [h, x] + b_f)     i = sigma(W_i [h, x] + b_i)
/// g = act(W_c [h, x] + b_c)       o = sigma(W_o [h, x] + b_o)
/// c' = f * c + i * g              h' = o * tanh(c')
/// ```
pub fn lstm_cell_forward(
    layer: &LstmLayerParams,
    activation: CandidateActivation,
    x: &[f64],
    state: &CellState,
) -> Result<(CellState, GateCache)> {
    let h = layer.hidden_size;
    if x.len() != layer.input_size || state.h.len() != h || state.c.len() != h {
        return Err(Error::Dimension(format!(
            "cell expects input {} and state {h}, got input {} and state {}/{}",
            layer.input_size,
            x.len(),
            state.h.len(),
            state.c.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("cell input"));
    }

    let mut z = Vec::with_capacity(h + x.len());
    z.extend_from_slice(&state.h);
    z.extend_from_slice(x);

    let f: Vec<f64> = layer.forget.affine(&z).into_iter().map(sigmoid).collect();
    let i: Vec<f64> = layer.input.affine(&z).into_iter().map(sigmoid).collect();
    let g: Vec<f64> = layer
        .candidate
        .affine(&z)
        .into_iter()
        .map(|a| activation.apply(a))
        .collect();
    let o: Vec<f64> = layer.output.affine(&z).into_iter().map(sigmoid).collect();

    let c: Vec<f64> = (0..h).map(|k| f[k] * state.c[k] + i[k] * g[k]).collect();
    let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
    let h_new: Vec<f64> = o.iter().zip(&tanh_c).map(|(o, t)| o * t).collect();

    let cache = GateCache {
        z,
        f,
        i,
        g,
        o,
        c_prev: state.c.clone(),
        tanh_c,
    };
    Ok((CellState { h: h_new, c }, cache))
}
