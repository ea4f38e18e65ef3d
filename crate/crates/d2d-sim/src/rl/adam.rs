//! Adam optimizer with bias correction.

use crate::error::{Result, SimError};
use crate::rl::mlp::{Mlp, MlpGrads};

/// Per-parameter first and second moment estimates plus the step counter.
/// Moments start at zero; each [`step`](AdamState::step) increments
/// `step_count` by exactly one.
#[derive(Debug, Clone)]
pub struct AdamState {
    m_weights: Vec<Vec<f64>>,
    v_weights: Vec<Vec<f64>>,
    m_biases: Vec<Vec<f64>>,
    v_biases: Vec<Vec<f64>>,
    step_count: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Zero-initialized moments shaped like `net`, default moment decays
    /// beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
    pub fn new(net: &Mlp, lr: f64) -> Result<Self> {
        if !lr.is_finite() || lr <= 0.0 {
            return Err(SimError::InvalidConfig {
                field: "learning_rate",
                reason: format!("must be positive, got {lr}"),
            });
        }
        let zeros_w: Vec<Vec<f64>> = net.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let zeros_b: Vec<Vec<f64>> = net.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        Ok(Self {
            m_weights: zeros_w.clone(),
            v_weights: zeros_w,
            m_biases: zeros_b.clone(),
            v_biases: zeros_b,
            step_count: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One bias-corrected Adam update:
    /// m <- b1 m + (1-b1) g; v <- b2 v + (1-b2) g^2;
    /// theta <- theta - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
    pub fn step(&mut self, net: &mut Mlp, grads: &MlpGrads) -> Result<()> {
        if grads.weights.len() != net.weights.len()
            || grads
                .weights
                .iter()
                .zip(&net.weights)
                .any(|(g, w)| g.len() != w.len())
        {
            return Err(SimError::Shape("gradient shapes do not match network".into()));
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let (lr, b1, b2, eps) = (self.lr, self.beta1, self.beta2, self.eps);

        let update = |theta: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..theta.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                theta[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        };
        for l in 0..net.weights.len() {
            update(&mut net.weights[l], &grads.weights[l], &mut self.m_weights[l], &mut self.v_weights[l]);
            update(&mut net.biases[l], &grads.biases[l], &mut self.m_biases[l], &mut self.v_biases[l]);
        }
        Ok(())
    }
}
