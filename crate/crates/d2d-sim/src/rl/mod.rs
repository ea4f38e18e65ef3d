//! Deep-Q machinery: network, optimizer, replay memory, action selection,
//! and the single-batch training step that ties them together.
//!
//! Everything here is task-agnostic; the power-control MDP lives one level
//! up. The task is continuing (no terminal states), so every TD target
//! includes the bootstrap term.

pub mod adam;
pub mod io;
pub mod mlp;
pub mod replay;

pub use adam::AdamState;
pub use mlp::{mse_loss, Mlp, MlpGrads};
pub use replay::{ReplayMemory, Transition};

use rand::Rng;

use crate::error::{Result, SimError};

/// TD target `y = reward + alpha * max_a Q(next_state, a)`.
///
/// `alpha` is the future-reward decay and must lie in [0, 1].
pub fn td_target(reward: f64, max_next_q: f64, alpha: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&alpha), "alpha {alpha} outside [0, 1]");
    reward + alpha * max_next_q
}

/// Index of the largest Q-value; ties break toward the lowest index.
pub fn argmax(q: &[f64]) -> usize {
    assert!(!q.is_empty(), "argmax over empty q-values");
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// With probability `epsilon` a uniform random action, otherwise the
/// greedy [`argmax`]. The exploration coin is always drawn, so the caller's
/// RNG advances identically on exploit steps regardless of the q-values.
pub fn epsilon_greedy(q: &[f64], epsilon: f64, rng: &mut impl Rng) -> usize {
    assert!((0.0..=1.0).contains(&epsilon), "epsilon {epsilon} outside [0, 1]");
    assert!(!q.is_empty(), "epsilon_greedy over empty q-values");
    if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..q.len())
    } else {
        argmax(q)
    }
}

/// One learning step: sample a batch, bootstrap targets from `target`
/// (or `net` itself when no target copy is in use), backpropagate, and apply
/// one Adam update.
///
/// Returns `Ok(None)` while the memory holds fewer than `batch_size`
/// transitions; otherwise the pre-update batch loss.
pub fn train_step(
    net: &mut Mlp,
    opt: &mut AdamState,
    mem: &ReplayMemory,
    batch_size: usize,
    alpha: f64,
    target: Option<&Mlp>,
    rng: &mut impl Rng,
) -> Result<Option<f64>> {
    if batch_size == 0 {
        return Err(SimError::Domain("batch_size must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(SimError::Domain(format!("decay factor {alpha} outside [0, 1]")));
    }
    let Some(batch) = mem.sample(batch_size, rng) else {
        return Ok(None);
    };

    let bootstrap_net = target.unwrap_or(net);
    let mut samples: Vec<(&[f64], usize, f64)> = Vec::with_capacity(batch.len());
    for t in &batch {
        let q_next = bootstrap_net.forward(&t.next_state)?;
        let max_next = q_next[argmax(&q_next)];
        samples.push((&t.state, t.action, td_target(t.reward, max_next, alpha)));
    }

    let (loss, grads) = net.backward(&samples)?;
    drop(samples);
    drop(batch);
    opt.step(net, &grads)?;
    Ok(Some(loss))
}
