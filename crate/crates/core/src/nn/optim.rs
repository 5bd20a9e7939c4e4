use serde::{Deserialize, Serialize};

use super::ParamSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerState {
    Adam { m: Vec<f64>, v: Vec<f64>, t: u64 },
    Sgd,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, param_count: usize) -> Self {
        match kind {
            OptimizerKind::Adam => Self::Adam {
                m: vec![0.0; param_count],
                v: vec![0.0; param_count],
                t: 0,
            },
            OptimizerKind::Sgd => Self::Sgd,
        }
    }
}

/// Applies one update in place. Adam uses bias-corrected moments.
pub fn optimizer_step(
    params: &mut ParamSet,
    grads: &ParamSet,
    state: &mut OptimizerState,
    learning_rate: f64,
) -> Result<()> {
    let n = params.len();
    if grads.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: grads.len(),
        });
    }
    if grads.values().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    match state {
        OptimizerState::Sgd => {
            for (p, g) in params.values_mut().zip(grads.values()) {
                *p -= learning_rate * g;
            }
        }
        OptimizerState::Adam { m, v, t } => {
            if m.len() != n || v.len() != n {
                return Err(Error::LengthMismatch { left: n, right: m.len() });
            }
            *t += 1;
            let c1 = 1.0 - ADAM_BETA1.powi(*t as i32);
            let c2 = 1.0 - ADAM_BETA2.powi(*t as i32);
            for (((p, g), m), v) in params.values_mut().zip(grads.values()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
            }
        }
    }
    Ok(())
}
