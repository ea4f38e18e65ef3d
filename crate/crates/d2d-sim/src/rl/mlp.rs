//! Fully-connected network with ReLU hidden layers and identity output.
//!
//! Parameters live in plain `Vec<f64>`s, row-major per layer. Backward
//! computes exact gradients of the mean-squared TD loss, which only reads
//! the taken action's output per sample, so the output-layer error vector
//! has a single nonzero entry and dead ReLU units are skipped.

use rand::Rng;

use crate::error::{Result, SimError};

/// Feed-forward Q-network. `layer_dims[0]` is the state dimension, the last
/// entry is the number of actions.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub(crate) layer_dims: Vec<usize>,
    /// weights[l] has shape (layer_dims[l+1], layer_dims[l]), row-major.
    pub(crate) weights: Vec<Vec<f64>>,
    /// biases[l] has length layer_dims[l+1].
    pub(crate) biases: Vec<Vec<f64>>,
}

/// Gradients with the same shapes as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub(crate) weights: Vec<Vec<f64>>,
    pub(crate) biases: Vec<Vec<f64>>,
}

fn validate_dims(layer_dims: &[usize]) -> Result<()> {
    if layer_dims.len() < 2 {
        return Err(SimError::Shape(format!(
            "network needs at least input and output layers, got dims {layer_dims:?}"
        )));
    }
    if layer_dims.contains(&0) {
        return Err(SimError::Shape(format!("zero-width layer in dims {layer_dims:?}")));
    }
    Ok(())
}

impl Mlp {
    /// Fresh network with weights and biases drawn uniformly from
    /// [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer.
    pub fn new(layer_dims: &[usize], rng: &mut impl Rng) -> Result<Self> {
        validate_dims(layer_dims)?;
        let mut weights = Vec::with_capacity(layer_dims.len() - 1);
        let mut biases = Vec::with_capacity(layer_dims.len() - 1);
        for w in layer_dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            weights.push((0..fan_in * fan_out).map(|_| rng.gen_range(-bound..bound)).collect());
            biases.push((0..fan_out).map(|_| rng.gen_range(-bound..bound)).collect());
        }
        Ok(Self { layer_dims: layer_dims.to_vec(), weights, biases })
    }

    /// Network from explicit parameters; shapes must match `layer_dims`.
    pub fn from_params(
        layer_dims: &[usize],
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        validate_dims(layer_dims)?;
        let layers = layer_dims.len() - 1;
        if weights.len() != layers || biases.len() != layers {
            return Err(SimError::Shape(format!(
                "expected {layers} weight/bias layers, got {}/{}",
                weights.len(),
                biases.len()
            )));
        }
        for (l, w) in layer_dims.windows(2).enumerate() {
            if weights[l].len() != w[0] * w[1] || biases[l].len() != w[1] {
                return Err(SimError::Shape(format!(
                    "layer {l}: expected {}x{} weights and {} biases, got {} and {}",
                    w[1],
                    w[0],
                    w[1],
                    weights[l].len(),
                    biases[l].len()
                )));
            }
        }
        Ok(Self { layer_dims: layer_dims.to_vec(), weights, biases })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    /// Total parameter count (weights + biases).
    pub fn flat_len(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// All parameters as one vector, layer by layer, weights before biases.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.flat_len());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            flat.extend_from_slice(w);
            flat.extend_from_slice(b);
        }
        flat
    }

    /// Overwrites all parameters from a [`to_flat`](Self::to_flat) vector.
    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.flat_len() {
            return Err(SimError::Shape(format!(
                "expected {} parameters, got {}",
                self.flat_len(),
                flat.len()
            )));
        }
        let mut pos = 0;
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            let (nw, nb) = (w.len(), b.len());
            w.copy_from_slice(&flat[pos..pos + nw]);
            pos += nw;
            b.copy_from_slice(&flat[pos..pos + nb]);
            pos += nb;
        }
        Ok(())
    }

    /// Q-values for one state.
    pub fn forward(&self, state: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_cached(state)?.pop().unwrap())
    }

    /// Post-activation values of every layer, input included. The last entry
    /// is the Q-vector.
    fn forward_cached(&self, state: &[f64]) -> Result<Vec<Vec<f64>>> {
        if state.len() != self.input_dim() {
            return Err(SimError::Shape(format!(
                "input dimension {} does not match network input {}",
                state.len(),
                self.input_dim()
            )));
        }
        let layers = self.weights.len();
        let mut acts = Vec::with_capacity(layers + 1);
        acts.push(state.to_vec());
        for l in 0..layers {
            let relu = l + 1 < layers;
            let prev = acts.last().unwrap();
            let out = mat_vec(&self.weights[l], &self.biases[l], prev, relu);
            acts.push(out);
        }
        Ok(acts)
    }

    /// Loss and exact gradients over a batch of (state, action, target).
    ///
    /// Loss is `(1/n) sum (Q(s)[a] - y)^2`; outputs other than the taken
    /// action carry zero error. Returns the loss evaluated at the current
    /// parameters along with its gradient.
    pub fn backward(&self, batch: &[(&[f64], usize, f64)]) -> Result<(f64, MlpGrads)> {
        if batch.is_empty() {
            return Err(SimError::Domain("backward requires a non-empty batch".into()));
        }
        let layers = self.weights.len();
        let out_dim = self.output_dim();
        let mut grads = MlpGrads::zeros_like(self);
        let inv_n = 1.0 / batch.len() as f64;
        let mut loss = 0.0;

        for &(state, action, y) in batch {
            if action >= out_dim {
                return Err(SimError::Shape(format!(
                    "action {action} out of range for {out_dim} outputs"
                )));
            }
            let acts = self.forward_cached(state)?;
            let diff = acts[layers][action] - y;
            loss += diff * diff * inv_n;

            // Output error: single nonzero at the taken action.
            let mut delta = vec![0.0; out_dim];
            delta[action] = 2.0 * diff * inv_n;

            for l in (0..layers).rev() {
                let in_dim = self.layer_dims[l];
                let prev = &acts[l];
                let gw = &mut grads.weights[l];
                let gb = &mut grads.biases[l];
                let mut delta_prev = vec![0.0; in_dim];
                for (j, &dj) in delta.iter().enumerate() {
                    if dj == 0.0 {
                        continue;
                    }
                    gb[j] += dj;
                    let row = &self.weights[l][j * in_dim..(j + 1) * in_dim];
                    let grow = &mut gw[j * in_dim..(j + 1) * in_dim];
                    for i in 0..in_dim {
                        grow[i] += dj * prev[i];
                        delta_prev[i] += dj * row[i];
                    }
                }
                if l > 0 {
                    // ReLU derivative: post-activation > 0 iff pre-activation > 0.
                    for (dp, &a) in delta_prev.iter_mut().zip(prev.iter()) {
                        if a <= 0.0 {
                            *dp = 0.0;
                        }
                    }
                    delta = delta_prev;
                }
            }
        }
        Ok((loss, grads))
    }
}

impl MlpGrads {
    pub(crate) fn zeros_like(net: &Mlp) -> Self {
        Self {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Same layout as [`Mlp::to_flat`].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            flat.extend_from_slice(w);
            flat.extend_from_slice(b);
        }
        flat
    }
}

/// Mean of squared differences between targets and taken-action predictions.
pub fn mse_loss(y: &[f64], q: &[f64]) -> Result<f64> {
    if y.is_empty() || y.len() != q.len() {
        return Err(SimError::Domain(format!(
            "mse_loss requires equal non-empty lengths, got {} and {}",
            y.len(),
            q.len()
        )));
    }
    let n = y.len() as f64;
    Ok(y.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n)
}

/// `w x + b` with optional ReLU; `w` row-major. Four independent
/// accumulators keep the FP pipeline busy on long rows.
fn mat_vec(w: &[f64], b: &[f64], x: &[f64], relu: bool) -> Vec<f64> {
    let in_dim = x.len();
    let mut out = Vec::with_capacity(b.len());
    for (j, &bias) in b.iter().enumerate() {
        let row = &w[j * in_dim..(j + 1) * in_dim];
        let mut acc = [0.0f64; 4];
        let whole = in_dim & !3;
        let mut i = 0;
        while i < whole {
            acc[0] += row[i] * x[i];
            acc[1] += row[i + 1] * x[i + 1];
            acc[2] += row[i + 2] * x[i + 2];
            acc[3] += row[i + 3] * x[i + 3];
            i += 4;
        }
        let mut z = (acc[0] + acc[1]) + (acc[2] + acc[3]);
        while i < in_dim {
            z += row[i] * x[i];
            i += 1;
        }
        z += bias;
        out.push(if relu && z < 0.0 { 0.0 } else { z });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn zero_net(dims: &[usize]) -> Mlp {
        let weights = dims.windows(2).map(|w| vec![0.0; w[0] * w[1]]).collect();
        let biases = dims.windows(2).map(|w| vec![0.0; w[1]]).collect();
        Mlp::from_params(dims, weights, biases).unwrap()
    }

    #[test]
    fn zero_parameters_give_zero_output() {
        let net = zero_net(&[3, 5, 2]);
        assert_eq!(net.forward(&[1.0, -2.0, 0.5]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let mut w = vec![0.0; 9];
        for i in 0..3 {
            w[i * 3 + i] = 1.0;
        }
        let net = Mlp::from_params(&[3, 3], vec![w], vec![vec![0.0; 3]]).unwrap();
        let x = [0.25, -1.5, 4.0];
        assert_eq!(net.forward(&x).unwrap(), x.to_vec());
    }

    #[test]
    #[allow(clippy::needless_range_loop)] // index form mirrors the math
    fn forward_matches_naive_reimplementation() {
        let dims = [4, 6, 5, 3];
        let net = Mlp::new(&dims, &mut rng(99)).unwrap();
        let x: Vec<f64> = (0..4).map(|i| (i as f64) * 0.3 - 0.5).collect();

        // Naive layer-by-layer evaluation, plain accumulation order.
        let mut a = x.clone();
        for l in 0..3 {
            let (din, dout) = (dims[l], dims[l + 1]);
            let mut next = vec![0.0; dout];
            for j in 0..dout {
                let mut z = net.biases[l][j];
                for i in 0..din {
                    z += net.weights[l][j * din + i] * a[i];
                }
                next[j] = if l + 1 < 3 && z < 0.0 { 0.0 } else { z };
            }
            a = next;
        }

        let got = net.forward(&x).unwrap();
        for (g, e) in got.iter().zip(&a) {
            assert_relative_eq!(g, e, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn forward_rejects_wrong_input_dimension() {
        let net = zero_net(&[3, 2]);
        assert!(net.forward(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn forward_is_deterministic() {
        let net = Mlp::new(&[5, 8, 4], &mut rng(3)).unwrap();
        let x = [0.1, 0.9, -0.3, 0.0, 2.0];
        let a = net.forward(&x).unwrap();
        let b = net.forward(&x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn init_respects_fan_in_bounds_and_seed() {
        let dims = [10, 7, 4];
        let net = Mlp::new(&dims, &mut rng(1)).unwrap();
        for (l, w) in dims.windows(2).enumerate() {
            let bound = 1.0 / (w[0] as f64).sqrt();
            for &p in net.weights[l].iter().chain(&net.biases[l]) {
                assert!(p.abs() <= bound, "layer {l}: {p} outside +/-{bound}");
            }
        }
        assert_eq!(net, Mlp::new(&dims, &mut rng(1)).unwrap());
        assert_ne!(net, Mlp::new(&dims, &mut rng(2)).unwrap());
    }

    #[test]
    fn mse_loss_known_values() {
        assert_eq!(mse_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(mse_loss(&[1.0, 2.0], &[1.0, 1.0]).unwrap(), 0.5, epsilon = 1e-15);
        assert!(mse_loss(&[], &[]).is_err());
        assert!(mse_loss(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mse_loss_matches_direct_summation() {
        let mut r = rng(7);
        let y: Vec<f64> = (0..33).map(|_| r.gen_range(-5.0..5.0)).collect();
        let q: Vec<f64> = (0..33).map(|_| r.gen_range(-5.0..5.0)).collect();
        let mut expected = 0.0;
        for i in 0..33 {
            expected += (y[i] - q[i]).powi(2);
        }
        expected /= 33.0;
        assert_relative_eq!(mse_loss(&y, &q).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn backward_zero_when_targets_equal_predictions() {
        let net = Mlp::new(&[3, 4, 2], &mut rng(5)).unwrap();
        let s = [0.2, 0.4, 0.6];
        let q = net.forward(&s).unwrap();
        let batch = [(&s[..], 0usize, q[0]), (&s[..], 1usize, q[1])];
        let (loss, grads) = net.backward(&batch).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grads.to_flat().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn backward_single_linear_layer_closed_form() {
        // One sample, one linear layer: dL/dW[a][i] = 2 (q - y) x[i],
        // dL/db[a] = 2 (q - y), other rows zero.
        let net = Mlp::from_params(
            &[2, 2],
            vec![vec![0.3, -0.7, 0.1, 0.9]],
            vec![vec![0.05, -0.2]],
        )
        .unwrap();
        let s = [1.5, -2.5];
        let q = net.forward(&s).unwrap();
        let y = 0.75;
        let action = 1;
        let (loss, grads) = net.backward(&[(&s[..], action, y)]).unwrap();

        let diff = q[action] - y;
        assert_relative_eq!(loss, diff * diff, max_relative = 1e-12);
        assert_relative_eq!(grads.weights[0][2], 2.0 * diff * s[0], max_relative = 1e-12);
        assert_relative_eq!(grads.weights[0][3], 2.0 * diff * s[1], max_relative = 1e-12);
        assert_relative_eq!(grads.biases[0][1], 2.0 * diff, max_relative = 1e-12);
        assert_eq!(grads.weights[0][0], 0.0);
        assert_eq!(grads.weights[0][1], 0.0);
        assert_eq!(grads.biases[0][0], 0.0);
    }

    #[test]
    fn backward_matches_central_finite_differences() {
        let mut r = rng(21);
        for _ in 0..3 {
            let dims = [3, 8, 6, 4];
            let mut net = Mlp::new(&dims, &mut r).unwrap();
            let states: Vec<Vec<f64>> = (0..5)
                .map(|_| (0..3).map(|_| r.gen_range(-1.0..1.0)).collect())
                .collect();
            let batch: Vec<(&[f64], usize, f64)> = states
                .iter()
                .map(|s| (s.as_slice(), r.gen_range(0..4), r.gen_range(-2.0..2.0)))
                .collect();

            let (_, grads) = net.backward(&batch).unwrap();
            let analytic = grads.to_flat();
            let mut flat = net.to_flat();

            let h = 1e-5;
            for idx in 0..flat.len() {
                let orig = flat[idx];
                flat[idx] = orig + h;
                net.set_flat(&flat).unwrap();
                let (lp, _) = net.backward(&batch).unwrap();
                flat[idx] = orig - h;
                net.set_flat(&flat).unwrap();
                let (lm, _) = net.backward(&batch).unwrap();
                flat[idx] = orig;
                net.set_flat(&flat).unwrap();

                let fd = (lp - lm) / (2.0 * h);
                let denom = analytic[idx].abs().max(fd.abs());
                if denom < 1e-8 {
                    assert!((analytic[idx] - fd).abs() < 1e-8, "param {idx}");
                } else {
                    let rel = (analytic[idx] - fd).abs() / denom;
                    assert!(rel < 1e-4, "param {idx}: analytic {} fd {fd}", analytic[idx]);
                }
            }
        }
    }

    #[test]
    fn flat_roundtrip_preserves_parameters() {
        let mut net = Mlp::new(&[4, 5, 3], &mut rng(8)).unwrap();
        let flat = net.to_flat();
        assert_eq!(flat.len(), net.flat_len());
        let copy = net.clone();
        net.set_flat(&flat).unwrap();
        assert_eq!(net, copy);
        assert!(net.set_flat(&flat[1..]).is_err());
    }
}
