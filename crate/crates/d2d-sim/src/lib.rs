//! Single-cell device-to-device (D2D) underlay simulator with deep-Q power control.
//!
//! D2D pairs reuse the uplink resource blocks of cellular users inside one
//! macro cell. Each D2D transmitter is an agent that picks a transmit power
//! level; a shared deep Q network is trained to maximize system throughput
//! while keeping every co-channel cellular user above its SINR threshold.
//! Max-power and open-loop power control baselines plus a sweep harness are
//! included for comparison runs.
//!
//! Module map:
//! - [`topology`]: cell geometry, path-loss models, link-gain tables
//! - [`phy`]: noise, per-RB SINR, and throughput computations
//! - [`rl`]: feed-forward Q network, Adam, replay memory, epsilon-greedy
//! - [`power`]: the multi-agent environment, DQN training, baselines
//! - [`harness`]: config files, experiment sweeps, CSV output

pub mod error;
pub mod harness;
pub mod phy;
pub mod power;
pub mod rl;
pub mod topology;

pub use error::{Result, SimError};
