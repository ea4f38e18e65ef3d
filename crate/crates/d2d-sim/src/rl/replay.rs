//! Experience replay: bounded FIFO storage with uniform sampling.

use std::collections::VecDeque;

use rand::Rng;

use crate::error::{Result, SimError};

/// One stored experience. `state` and `next_state` must share a dimension;
/// `action` must be a valid output index of the network being trained.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// Bounded FIFO of transitions. Pushing past capacity evicts the oldest
/// entry; size never exceeds capacity.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    capacity: usize,
    buffer: VecDeque<Transition>,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(SimError::InvalidConfig {
                field: "replay_capacity",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self { capacity, buffer: VecDeque::with_capacity(capacity) })
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, transition: Transition) {
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(transition);
    }

    /// Uniform sample without replacement within one call. Returns `None`
    /// while the buffer holds fewer than `batch_size` transitions, signaling
    /// the caller to skip the learning step.
    pub fn sample(&self, batch_size: usize, rng: &mut impl Rng) -> Option<Vec<&Transition>> {
        if self.buffer.len() < batch_size {
            return None;
        }
        let picks = rand::seq::index::sample(rng, self.buffer.len(), batch_size);
        Some(picks.iter().map(|i| &self.buffer[i]).collect())
    }
}
