use serde::{Deserialize, Serialize};

use super::{Gradient, PolicyParams};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self {
            lr: 5e-6,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
    pub config: AdamWConfig,
}

impl OptimizerState {
    pub fn new(params: &PolicyParams, config: AdamWConfig) -> Self {
        Self {
            m: vec![0.0; params.len()],
            v: vec![0.0; params.len()],
            step: 0,
            config,
        }
    }
}

/// One AdamW update with bias correction and decoupled weight decay.
pub fn adamw_step(
    params: &mut PolicyParams,
    state: &mut OptimizerState,
    grad: &Gradient,
) -> Result<()> {
    if grad.0.len() != params.len() || state.m.len() != params.len() {
        return Err(Error::InvalidParameter(format!(
            "gradient has {} entries, parameters {}",
            grad.0.len(),
            params.len()
        )));
    }
    if !grad.is_finite() {
        return Err(Error::NonFiniteGradient);
    }
    let c = &state.config;
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - c.beta1.powi(t);
    let bc2 = 1.0 - c.beta2.powi(t);
    for (i, theta) in params.theta_mut().iter_mut().enumerate() {
        let g = grad.0[i];
        *theta -= c.lr * c.weight_decay * *theta;
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        *theta -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
    }
    Ok(())
}
