use serde::{Deserialize, Serialize};

use super::nn::Mlp;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adaptive-moment optimizer state for one network.
#[derive(Debug, Clone)]
pub struct Adam<T = f64> {
    config: AdamConfig,
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
}

impl<T: Scalar> Adam<T> {
    pub fn new(num_params: usize, config: AdamConfig) -> Self {
        Self {
            config,
            m: vec![T::zero(); num_params],
            v: vec![T::zero(); num_params],
            t: 0,
        }
    }

    /// One descent step on `net` along `grads` (gradients of a loss to minimize).
    pub fn step(&mut self, net: &mut Mlp<T>, grads: &Mlp<T>, lr: T) {
        self.t += 1;
        let b1 = T::lit(self.config.beta1);
        let b2 = T::lit(self.config.beta2);
        let eps = T::lit(self.config.eps);
        let c1 = T::one() - b1.powi(self.t);
        let c2 = T::one() - b2.powi(self.t);
        for (((p, &g), m), v) in net
            .params_mut()
            .zip(grads.params())
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = b1 * *m + (T::one() - b1) * g;
            *v = b2 * *v + (T::one() - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}
