//! Adam optimizer state and update rule.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// First and second moment accumulators for one parameter vector.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Standard hyperparameters: beta1 0.9, beta2 0.999, eps 1e-8.
    pub fn new(dim: usize) -> Self {
        AdamState {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected ascent step: params += lr * m_hat / (sqrt(v_hat) + eps).
    ///
    /// The objective here is a reward to maximize, hence ascent. A
    /// non-finite gradient aborts with an error before any state changes.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) -> Result<()> {
        if params.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(Error::DimensionMismatch {
                expected: self.m.len(),
                got: grad.len(),
            });
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient passed to Adam"));
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - math::powi(self.beta1, t);
        let bc2 = 1.0 - math::powi(self.beta2, t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] += lr * m_hat / (math::sqrt(v_hat) + self.eps);
        }
        Ok(())
    }
}
