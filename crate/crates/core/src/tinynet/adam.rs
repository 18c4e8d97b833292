use serde::{Deserialize, Serialize};

use super::{Gradients, Mlp};

/// Adam hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 0.01, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First and second moment estimates for every parameter, plus the step count.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: Gradients,
    pub v: Gradients,
    pub t: u64,
}

impl AdamState {
    pub fn new(net: &Mlp, config: AdamConfig) -> Self {
        Self { config, m: Gradients::zeros_like(net), v: Gradients::zeros_like(net), t: 0 }
    }

    /// One bias-corrected Adam update. Frozen layers and their moments are left untouched.
    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients) {
        self.t += 1;
        let t = self.t.min(i32::MAX as u64) as i32;
        let c = self.config;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        let frozen = net.arch.frozen.clone();
        for (l, layer) in net.layers.iter_mut().enumerate() {
            if frozen[l] {
                continue;
            }
            let g = &grads.layers[l];
            let (m, v) = (&mut self.m.layers[l], &mut self.v.layers[l]);
            update(&mut layer.weights, &g.weights, &mut m.weights, &mut v.weights, c, bc1, bc2);
            update(&mut layer.biases, &g.biases, &mut m.biases, &mut v.biases, c, bc1, bc2);
        }
    }
}

#[inline]
fn update(params: &mut [f64], grads: &[f64], m: &mut [f64], v: &mut [f64], c: AdamConfig, bc1: f64, bc2: f64) {
    for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(m.iter_mut()).zip(v.iter_mut()) {
        *m = c.beta1 * *m + (1.0 - c.beta1) * g;
        *v = c.beta2 * *v + (1.0 - c.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
    }
}

