//! The power-control MDP: discrete power levels as actions, the broadcast
//! CUE-SINR vector as state, and a QoS-gated throughput reward.
//!
//! Each D2D transmitter is an agent. The BS broadcasts the CUE SINR report,
//! every agent observes the same clamped, normalized vector, picks a power
//! level, and is rewarded by the sum rate of its own link and its co-channel
//! CUE, or punished when it drives that CUE below the SINR threshold.

pub mod baselines;
pub mod env;
pub mod train;

pub use baselines::{max_power_policy, olpc_policy, olpc_power_dbm, OlpcParams};
pub use env::{env_step, initial_state, StepOutcome};
pub use train::{evaluate, DqnConfig, EvalMetrics, TrainedPolicy, Trainer};

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SimError};
use crate::phy::{dbm_to_watt, SinrReport};

/// Observation clamp floor (dB); zero SINR maps here.
pub const STATE_CLAMP_MIN_DB: f64 = -30.0;
/// Observation clamp ceiling (dB); also bounds the reward's SINR inputs.
pub const STATE_CLAMP_MAX_DB: f64 = 50.0;

/// Discrete transmit power grid, evenly spaced in dBm.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpace {
    levels_dbm: Vec<f64>,
}

impl ActionSpace {
    /// `num_levels` evenly spaced values from `min_power_dbm` to
    /// `max_power_dbm` inclusive; the top level is the power cap.
    pub fn new(num_levels: usize, min_power_dbm: f64, max_power_dbm: f64) -> Result<Self> {
        if num_levels < 2 {
            return Err(SimError::InvalidConfig {
                field: "num_power_levels",
                reason: format!("need at least 2 levels, got {num_levels}"),
            });
        }
        if !min_power_dbm.is_finite() || !max_power_dbm.is_finite() || min_power_dbm >= max_power_dbm
        {
            return Err(SimError::InvalidConfig {
                field: "min_power_dbm",
                reason: format!(
                    "power grid needs finite min < max, got [{min_power_dbm}, {max_power_dbm}]"
                ),
            });
        }
        let step = (max_power_dbm - min_power_dbm) / (num_levels - 1) as f64;
        let mut levels_dbm: Vec<f64> =
            (0..num_levels).map(|i| min_power_dbm + i as f64 * step).collect();
        // Pin the endpoint so the top action is exactly the cap.
        *levels_dbm.last_mut().unwrap() = max_power_dbm;
        Ok(Self { levels_dbm })
    }

    pub fn num_levels(&self) -> usize {
        self.levels_dbm.len()
    }

    pub fn levels_dbm(&self) -> &[f64] {
        &self.levels_dbm
    }

    /// Transmit power in watts for an action index.
    pub fn action_to_power_w(&self, index: usize) -> Result<f64> {
        self.levels_dbm
            .get(index)
            .map(|&dbm| dbm_to_watt(dbm))
            .ok_or_else(|| {
                SimError::Domain(format!(
                    "action index {index} out of range for {} levels",
                    self.levels_dbm.len()
                ))
            })
    }
}

impl Default for ActionSpace {
    /// Ten levels over [-10, 23] dBm.
    fn default() -> Self {
        Self::new(10, -10.0, 23.0).expect("valid default grid")
    }
}

/// Episode shape and the CUE protection threshold.
#[derive(Debug, Clone)]
pub struct EnvConfig {
    /// Minimum acceptable CUE SINR (dB); equality passes.
    pub tau_db: f64,
    /// Steps per episode T.
    pub steps_per_episode: usize,
    /// Training episodes M.
    pub episodes: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self { tau_db: 6.0, steps_per_episode: 20, episodes: 300 }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.tau_db.is_finite() {
            return Err(SimError::InvalidConfig {
                field: "tau_db",
                reason: format!("must be finite, got {}", self.tau_db),
            });
        }
        if self.steps_per_episode < 1 {
            return Err(SimError::InvalidConfig {
                field: "steps_per_episode",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// The shared observation: every CUE's SINR in dB, clamped to
/// [[`STATE_CLAMP_MIN_DB`], [`STATE_CLAMP_MAX_DB`]] and mapped affinely to
/// [0, 1]. All agents receive this same broadcast vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub normalized_cue_sinr: Vec<f64>,
}

impl AgentState {
    pub fn as_slice(&self) -> &[f64] {
        &self.normalized_cue_sinr
    }
}

/// Clamps and normalizes the CUE SINR report into the network input.
pub fn observe_state(report: &SinrReport) -> AgentState {
    let span = STATE_CLAMP_MAX_DB - STATE_CLAMP_MIN_DB;
    let normalized_cue_sinr = report
        .cue_sinr_lin
        .iter()
        .map(|&lin| {
            let db = 10.0 * lin.log10();
            let clamped = db.clamp(STATE_CLAMP_MIN_DB, STATE_CLAMP_MAX_DB);
            (clamped - STATE_CLAMP_MIN_DB) / span
        })
        .collect();
    AgentState { normalized_cue_sinr }
}

/// QoS-gated sum-rate reward for one agent.
///
/// If the co-channel CUE meets the threshold (`10 log10(gamma_c) >= tau_db`,
/// equality passes), the reward is `log2(1+gamma_c) + log2(1+gamma_d)`;
/// otherwise -1. Both SINRs are capped at the observation ceiling's linear
/// value before the logs, keeping the reward within
/// [-1, 2 log2(1 + 10^(STATE_CLAMP_MAX_DB/10))] even on extreme short links.
pub fn reward(gamma_c_lin: f64, gamma_d_lin: f64, tau_db: f64) -> f64 {
    debug_assert!(gamma_c_lin >= 0.0 && gamma_d_lin >= 0.0);
    if 10.0 * gamma_c_lin.log10() >= tau_db {
        let cap = 10f64.powf(STATE_CLAMP_MAX_DB / 10.0);
        (1.0 + gamma_c_lin.min(cap)).log2() + (1.0 + gamma_d_lin.min(cap)).log2()
    } else {
        -1.0
    }
}

/// Power-control strategy under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Dqn,
    MaxPower,
    Olpc,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Dqn, Algorithm::MaxPower, Algorithm::Olpc];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Dqn => "dqn",
            Algorithm::MaxPower => "max_power",
            Algorithm::Olpc => "olpc",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dqn" => Ok(Algorithm::Dqn),
            "max_power" => Ok(Algorithm::MaxPower),
            "olpc" => Ok(Algorithm::Olpc),
            other => Err(SimError::Domain(format!(
                "unknown algorithm {other:?}, expected dqn, max_power, or olpc"
            ))),
        }
    }
}
