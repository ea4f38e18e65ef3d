//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, omitted keys keep their
//! defaults. Lists (`d2d_counts`, `seeds`, `algorithm`) are comma-separated.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Result, SimError};
use crate::phy::RadioConfig;
use crate::power::{ActionSpace, Algorithm, DqnConfig, EnvConfig, OlpcParams};
use crate::topology::CellConfig;

/// Every tunable of the simulator in one flat record.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub num_cues: usize,
    /// D2D pair count for single runs; sweeps use `d2d_counts` instead.
    pub num_d2d_pairs: usize,
    pub cell_radius_m: f64,
    pub d2d_max_dist_m: f64,
    pub bs_antenna_gain_dbi: f64,
    pub ue_antenna_gain_dbi: f64,
    pub shadowing_sigma_db: f64,
    pub noise_density_dbm_hz: f64,
    pub rb_bandwidth_hz: f64,
    pub p_max_dbm: f64,
    pub cue_tx_power_dbm: f64,
    pub num_power_levels: usize,
    pub min_power_dbm: f64,
    pub tau_db: f64,
    pub steps_per_episode: usize,
    pub episodes: usize,
    pub learning_rate: f64,
    pub decay_factor: f64,
    pub epsilon: f64,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub target_sync_interval: usize,
    pub shared_network: bool,
    /// Algorithms a sweep compares; `eval` needs exactly one.
    pub algorithms: Vec<Algorithm>,
    pub d2d_counts: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Held-out topologies per sweep cell.
    pub eval_topologies: usize,
    pub eval_steps: usize,
    pub olpc_p0_dbm: f64,
    pub olpc_alpha: f64,
    pub output_path: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            num_cues: 30,
            num_d2d_pairs: 10,
            cell_radius_m: 500.0,
            d2d_max_dist_m: 50.0,
            bs_antenna_gain_dbi: 17.0,
            ue_antenna_gain_dbi: 4.0,
            shadowing_sigma_db: 0.0,
            noise_density_dbm_hz: -176.0,
            rb_bandwidth_hz: 180_000.0,
            p_max_dbm: 23.0,
            cue_tx_power_dbm: 23.0,
            num_power_levels: 10,
            min_power_dbm: -10.0,
            tau_db: 6.0,
            steps_per_episode: 20,
            episodes: 300,
            learning_rate: 0.001,
            decay_factor: 0.95,
            epsilon: 0.1,
            hidden_layers: 2,
            hidden_width: 200,
            replay_capacity: 10_000,
            batch_size: 32,
            target_sync_interval: 0,
            shared_network: true,
            algorithms: Algorithm::ALL.to_vec(),
            d2d_counts: vec![2, 4, 6, 8, 10],
            seeds: vec![1, 2, 3, 4, 5],
            eval_topologies: 50,
            eval_steps: 20,
            olpc_p0_dbm: -78.0,
            olpc_alpha: 0.8,
            output_path: PathBuf::from("results.csv"),
        }
    }
}

impl ExperimentConfig {
    /// Cell geometry for a given number of D2D pairs.
    pub fn cell(&self, num_d2d_pairs: usize) -> CellConfig {
        CellConfig {
            cell_radius_m: self.cell_radius_m,
            d2d_max_dist_m: self.d2d_max_dist_m,
            num_cues: self.num_cues,
            num_d2d_pairs,
            bs_antenna_gain_dbi: self.bs_antenna_gain_dbi,
            ue_antenna_gain_dbi: self.ue_antenna_gain_dbi,
            shadowing_sigma_db: self.shadowing_sigma_db,
        }
    }

    pub fn radio(&self) -> RadioConfig {
        RadioConfig {
            noise_density_dbm_hz: self.noise_density_dbm_hz,
            rb_bandwidth_hz: self.rb_bandwidth_hz,
            p_max_dbm: self.p_max_dbm,
            cue_tx_power_dbm: self.cue_tx_power_dbm,
        }
    }

    pub fn env(&self) -> EnvConfig {
        EnvConfig {
            tau_db: self.tau_db,
            steps_per_episode: self.steps_per_episode,
            episodes: self.episodes,
        }
    }

    pub fn action_space(&self) -> Result<ActionSpace> {
        ActionSpace::new(self.num_power_levels, self.min_power_dbm, self.p_max_dbm)
    }

    pub fn dqn(&self) -> DqnConfig {
        DqnConfig {
            learning_rate: self.learning_rate,
            decay_factor: self.decay_factor,
            epsilon: self.epsilon,
            hidden_layers: self.hidden_layers,
            hidden_width: self.hidden_width,
            replay_capacity: self.replay_capacity,
            batch_size: self.batch_size,
            target_sync_interval: self.target_sync_interval,
            shared_network: self.shared_network,
        }
    }

    pub fn olpc(&self) -> OlpcParams {
        OlpcParams { p0_dbm: self.olpc_p0_dbm, alpha: self.olpc_alpha }
    }

    pub fn validate(&self) -> Result<()> {
        self.cell(self.num_d2d_pairs).validate()?;
        self.radio().validate()?;
        self.env().validate()?;
        self.action_space()?;
        self.dqn().validate()?;
        if self.algorithms.is_empty() {
            return Err(SimError::InvalidConfig {
                field: "algorithm",
                reason: "at least one algorithm is required".into(),
            });
        }
        if self.d2d_counts.is_empty() {
            return Err(SimError::InvalidConfig {
                field: "d2d_counts",
                reason: "at least one D2D count is required".into(),
            });
        }
        if self.seeds.is_empty() {
            return Err(SimError::InvalidConfig {
                field: "seeds",
                reason: "at least one seed is required".into(),
            });
        }
        if self.eval_topologies < 1 {
            return Err(SimError::InvalidConfig {
                field: "eval_topologies",
                reason: "must be at least 1".into(),
            });
        }
        if self.eval_steps < 1 {
            return Err(SimError::InvalidConfig {
                field: "eval_steps",
                reason: "must be at least 1".into(),
            });
        }
        if !self.olpc_p0_dbm.is_finite() || !self.olpc_alpha.is_finite() {
            return Err(SimError::InvalidConfig {
                field: "olpc_p0_dbm",
                reason: "open-loop parameters must be finite".into(),
            });
        }
        Ok(())
    }

    /// Applies one assignment exactly as a config-file line would.
    /// Validation happens when the config is used, not here.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.apply(key, value).map_err(SimError::Domain)
    }

    fn apply(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "num_cues" => self.num_cues = parse_num(key, value)?,
            "num_d2d_pairs" => self.num_d2d_pairs = parse_num(key, value)?,
            "cell_radius_m" => self.cell_radius_m = parse_num(key, value)?,
            "d2d_max_dist_m" => self.d2d_max_dist_m = parse_num(key, value)?,
            "bs_antenna_gain_dbi" => self.bs_antenna_gain_dbi = parse_num(key, value)?,
            "ue_antenna_gain_dbi" => self.ue_antenna_gain_dbi = parse_num(key, value)?,
            "shadowing_sigma_db" => self.shadowing_sigma_db = parse_num(key, value)?,
            "noise_density_dbm_hz" => self.noise_density_dbm_hz = parse_num(key, value)?,
            "rb_bandwidth_hz" => self.rb_bandwidth_hz = parse_num(key, value)?,
            "p_max_dbm" => self.p_max_dbm = parse_num(key, value)?,
            "cue_tx_power_dbm" => self.cue_tx_power_dbm = parse_num(key, value)?,
            "num_power_levels" => self.num_power_levels = parse_num(key, value)?,
            "min_power_dbm" => self.min_power_dbm = parse_num(key, value)?,
            "tau_db" => self.tau_db = parse_num(key, value)?,
            "steps_per_episode" => self.steps_per_episode = parse_num(key, value)?,
            "episodes" => self.episodes = parse_num(key, value)?,
            "learning_rate" => self.learning_rate = parse_num(key, value)?,
            "decay_factor" => self.decay_factor = parse_num(key, value)?,
            "epsilon" => self.epsilon = parse_num(key, value)?,
            "hidden_layers" => self.hidden_layers = parse_num(key, value)?,
            "hidden_width" => self.hidden_width = parse_num(key, value)?,
            "replay_capacity" => self.replay_capacity = parse_num(key, value)?,
            "batch_size" => self.batch_size = parse_num(key, value)?,
            "target_sync_interval" => self.target_sync_interval = parse_num(key, value)?,
            "shared_network" => self.shared_network = parse_bool(key, value)?,
            "algorithm" => self.algorithms = parse_algorithms(value)?,
            "d2d_counts" => self.d2d_counts = parse_list(key, value)?,
            "seeds" => self.seeds = parse_list(key, value)?,
            "eval_topologies" => self.eval_topologies = parse_num(key, value)?,
            "eval_steps" => self.eval_steps = parse_num(key, value)?,
            "olpc_p0_dbm" => self.olpc_p0_dbm = parse_num(key, value)?,
            "olpc_alpha" => self.olpc_alpha = parse_num(key, value)?,
            "output_path" => self.output_path = PathBuf::from(value),
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("invalid value {value:?} for {key}"))
}

fn parse_bool(key: &str, value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("invalid value {value:?} for {key}, expected true or false")),
    }
}

fn parse_list<T: std::str::FromStr>(
    key: &str,
    value: &str,
) -> std::result::Result<Vec<T>, String> {
    value
        .split(',')
        .map(|item| parse_num(key, item.trim()))
        .collect()
}

fn parse_algorithms(value: &str) -> std::result::Result<Vec<Algorithm>, String> {
    let algos: Vec<Algorithm> = value
        .split(',')
        .map(|item| item.trim().parse().map_err(|e| format!("{e}")))
        .collect::<std::result::Result<_, String>>()?;
    let mut seen = HashSet::new();
    for algo in &algos {
        if !seen.insert(*algo) {
            return Err(format!("algorithm {algo} listed twice"));
        }
    }
    Ok(algos)
}

/// Parses configuration text, overlaying assignments on the defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let Some((key, value)) = stripped.split_once('=') else {
            return Err(SimError::Parse {
                line,
                msg: format!("expected `key = value`, got {stripped:?}"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(SimError::Parse { line, msg: format!("duplicate key {key:?}") });
        }
        config.apply(key, value).map_err(|msg| SimError::Parse { line, msg })?;
    }
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|err| SimError::io(path, err))?;
    parse_config(&text)
}
