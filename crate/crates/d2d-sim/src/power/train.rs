//! DQN training over random episodes and greedy-policy evaluation.
//!
//! Training runs M episodes of T steps. Every episode draws a fresh
//! topology; within an episode the channel is static and only the D2D
//! powers move. By default all agents share one network and one replay
//! memory, so experience from every transmitter trains the same
//! parameters; an independent-networks mode is available for comparison.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SimError};
use crate::phy::{
    compute_sinr_report, d2d_throughput, dbm_to_watt, noise_power_w, system_throughput,
    PowerAllocation, RadioConfig, ReuseAssignment, SinrReport,
};
use crate::power::{
    env_step, initial_state, max_power_policy, observe_state, olpc_policy, ActionSpace,
    AgentState, Algorithm, EnvConfig, OlpcParams,
};
use crate::rl::io::{load_networks, save_networks};
use crate::rl::{argmax, epsilon_greedy, train_step, AdamState, Mlp, ReplayMemory, Transition};
use crate::topology::{build_gain_table, place_nodes, CellConfig, GainTable, Topology};

/// Q-learning hyperparameters.
#[derive(Debug, Clone)]
pub struct DqnConfig {
    pub learning_rate: f64,
    /// Decay on the bootstrapped future value in the TD target.
    pub decay_factor: f64,
    /// Exploration probability; fixed over training.
    pub epsilon: f64,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Updates between target-network syncs; 0 bootstraps from the live
    /// network instead.
    pub target_sync_interval: usize,
    /// One network and replay memory for all agents, or one per agent.
    pub shared_network: bool,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            decay_factor: 0.95,
            epsilon: 0.1,
            hidden_layers: 2,
            hidden_width: 200,
            replay_capacity: 10_000,
            batch_size: 32,
            target_sync_interval: 0,
            shared_network: true,
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(SimError::InvalidConfig {
                field: "learning_rate",
                reason: format!("must be positive and finite, got {}", self.learning_rate),
            });
        }
        if !(0.0..=1.0).contains(&self.decay_factor) {
            return Err(SimError::InvalidConfig {
                field: "decay_factor",
                reason: format!("must lie in [0, 1], got {}", self.decay_factor),
            });
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(SimError::InvalidConfig {
                field: "epsilon",
                reason: format!("must lie in [0, 1], got {}", self.epsilon),
            });
        }
        if self.hidden_layers > 0 && self.hidden_width < 1 {
            return Err(SimError::InvalidConfig {
                field: "hidden_width",
                reason: "hidden layers need at least one neuron".into(),
            });
        }
        if self.batch_size < 1 {
            return Err(SimError::InvalidConfig {
                field: "batch_size",
                reason: "must be at least 1".into(),
            });
        }
        if self.replay_capacity < self.batch_size {
            return Err(SimError::InvalidConfig {
                field: "replay_capacity",
                reason: format!(
                    "capacity {} cannot hold a batch of {}",
                    self.replay_capacity, self.batch_size
                ),
            });
        }
        Ok(())
    }

    fn layer_dims(&self, inputs: usize, outputs: usize) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden_layers + 2);
        dims.push(inputs);
        dims.extend(std::iter::repeat_n(self.hidden_width, self.hidden_layers));
        dims.push(outputs);
        dims
    }
}

/// Multi-agent DQN trainer for one cell configuration.
pub struct Trainer {
    cell: CellConfig,
    radio: RadioConfig,
    env: EnvConfig,
    space: ActionSpace,
    dqn: DqnConfig,
    nets: Vec<Mlp>,
    opts: Vec<AdamState>,
    mems: Vec<ReplayMemory>,
    targets: Option<Vec<Mlp>>,
    train_steps: u64,
    seed: u64,
    rng: ChaCha8Rng,
}

impl Trainer {
    pub fn new(
        cell: CellConfig,
        radio: RadioConfig,
        env: EnvConfig,
        space: ActionSpace,
        dqn: DqnConfig,
        seed: u64,
    ) -> Result<Self> {
        cell.validate()?;
        radio.validate()?;
        env.validate()?;
        dqn.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = dqn.layer_dims(cell.num_cues, space.num_levels());
        let count = if dqn.shared_network { 1 } else { cell.num_d2d_pairs };
        let mut nets = Vec::with_capacity(count);
        let mut opts = Vec::with_capacity(count);
        let mut mems = Vec::with_capacity(count);
        for _ in 0..count {
            let net = Mlp::new(&dims, &mut rng)?;
            opts.push(AdamState::new(&net, dqn.learning_rate)?);
            mems.push(ReplayMemory::new(dqn.replay_capacity)?);
            nets.push(net);
        }
        let targets = (dqn.target_sync_interval > 0).then(|| nets.clone());
        Ok(Self {
            cell,
            radio,
            env,
            space,
            dqn,
            nets,
            opts,
            mems,
            targets,
            train_steps: 0,
            seed,
            rng,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Total optimizer updates applied so far, summed over networks.
    pub fn train_steps_done(&self) -> u64 {
        self.train_steps
    }

    /// Runs the full schedule, drawing a fresh topology per episode.
    /// Returns the per-episode mean per-agent step reward.
    pub fn train(&mut self) -> Result<Vec<f64>> {
        let mut curve = Vec::with_capacity(self.env.episodes);
        for _ in 0..self.env.episodes {
            let topo = place_nodes(&self.cell, &mut self.rng);
            let gains = build_gain_table(&topo, &self.cell, &mut self.rng)?;
            let reuse = ReuseAssignment::from_topology(&topo)?;
            curve.push(self.run_episode(&gains, &reuse)?);
        }
        Ok(curve)
    }

    /// One T-step episode on a fixed channel: epsilon-greedy actions, one
    /// environment advance per step, every agent's transition pushed, one
    /// update per network once its memory is warm.
    pub fn run_episode(&mut self, gains: &GainTable, reuse: &ReuseAssignment) -> Result<f64> {
        if reuse.num_rbs() != self.cell.num_cues || reuse.num_pairs() != self.cell.num_d2d_pairs {
            return Err(SimError::Shape(format!(
                "topology with {} RBs / {} pairs does not match the {} CUE / {} pair trainer",
                reuse.num_rbs(),
                reuse.num_pairs(),
                self.cell.num_cues,
                self.cell.num_d2d_pairs
            )));
        }
        let num_agents = reuse.num_pairs();
        let mut state = initial_state(gains, reuse, &self.radio)?;
        let mut total = 0.0;
        for _ in 0..self.env.steps_per_episode {
            let actions = self.select_actions(&state, num_agents)?;
            let outcome =
                env_step(gains, reuse, &actions, &self.space, &self.radio, self.env.tau_db)?;
            for (agent, &action) in actions.iter().enumerate() {
                let slot = if self.dqn.shared_network { 0 } else { agent };
                self.mems[slot].push(Transition {
                    state: state.as_slice().to_vec(),
                    action,
                    reward: outcome.rewards[agent],
                    next_state: outcome.next_state.as_slice().to_vec(),
                });
            }
            self.learn()?;
            if num_agents > 0 {
                total += outcome.rewards.iter().sum::<f64>() / num_agents as f64;
            }
            state = outcome.next_state;
        }
        Ok(total / self.env.steps_per_episode as f64)
    }

    fn select_actions(&mut self, state: &AgentState, num_agents: usize) -> Result<Vec<usize>> {
        let Self { nets, rng, dqn, .. } = self;
        if dqn.shared_network {
            // One forward pass serves every agent; each still draws its own
            // exploration coin.
            let q = nets[0].forward(state.as_slice())?;
            Ok((0..num_agents).map(|_| epsilon_greedy(&q, dqn.epsilon, rng)).collect())
        } else {
            nets.iter()
                .map(|net| {
                    let q = net.forward(state.as_slice())?;
                    Ok(epsilon_greedy(&q, dqn.epsilon, rng))
                })
                .collect()
        }
    }

    fn learn(&mut self) -> Result<()> {
        let Self { nets, opts, mems, targets, rng, dqn, train_steps, .. } = self;
        for i in 0..nets.len() {
            let frozen = targets.as_ref().map(|ts| &ts[i]);
            let loss = train_step(
                &mut nets[i],
                &mut opts[i],
                &mems[i],
                dqn.batch_size,
                dqn.decay_factor,
                frozen,
                rng,
            )?;
            if loss.is_some() {
                *train_steps += 1;
                if dqn.target_sync_interval > 0
                    && opts[i].step_count() % dqn.target_sync_interval as u64 == 0
                {
                    if let Some(ts) = targets.as_mut() {
                        ts[i] = nets[i].clone();
                    }
                }
            }
        }
        Ok(())
    }

    pub fn into_policy(self) -> TrainedPolicy {
        TrainedPolicy { nets: self.nets, seed: self.seed }
    }
}

/// Frozen greedy policy produced by training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedPolicy {
    nets: Vec<Mlp>,
    seed: u64,
}

impl TrainedPolicy {
    pub fn new(nets: Vec<Mlp>, seed: u64) -> Self {
        Self { nets, seed }
    }

    pub fn num_networks(&self) -> usize {
        self.nets.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Greedy joint action. A single shared network answers for every
    /// agent; otherwise there must be one network per agent.
    pub fn greedy_actions(&self, state: &AgentState, num_agents: usize) -> Result<Vec<usize>> {
        if self.nets.len() == 1 {
            let q = self.nets[0].forward(state.as_slice())?;
            Ok(vec![argmax(&q); num_agents])
        } else if self.nets.len() == num_agents {
            self.nets
                .iter()
                .map(|net| Ok(argmax(&net.forward(state.as_slice())?)))
                .collect()
        } else {
            Err(SimError::Shape(format!(
                "policy holds {} networks for {} agents",
                self.nets.len(),
                num_agents
            )))
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save_networks(path, &self.nets, self.seed)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (nets, seed) = load_networks(path)?;
        Ok(Self { nets, seed })
    }
}

/// Evaluation averages over held-out topologies and steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalMetrics {
    /// Mean per-step sum rate over all CUEs and D2D links (bit/s/Hz).
    pub system_throughput_bps_hz: f64,
    /// Mean per-step sum rate over D2D links only (bit/s/Hz).
    pub d2d_throughput_bps_hz: f64,
    /// Fraction of (step, reused-RB) pairs whose CUE meets the threshold.
    pub cue_qos_rate: f64,
}

/// Runs `algo` on each held-out topology for `eval_steps` steps and averages
/// the metrics. Baselines transmit at fixed powers; the DQN plays its greedy
/// action from the observed state each step. No exploration, no learning.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    algo: Algorithm,
    policy: Option<&TrainedPolicy>,
    topologies: &[(Topology, GainTable)],
    radio: &RadioConfig,
    space: &ActionSpace,
    tau_db: f64,
    eval_steps: usize,
    olpc: &OlpcParams,
) -> Result<EvalMetrics> {
    if topologies.is_empty() {
        return Err(SimError::Domain("evaluation needs at least one topology".into()));
    }
    if eval_steps < 1 {
        return Err(SimError::Domain("eval_steps must be at least 1".into()));
    }
    radio.validate()?;
    let policy = match algo {
        Algorithm::Dqn => Some(policy.ok_or_else(|| {
            SimError::Domain("dqn evaluation requires a trained policy".into())
        })?),
        _ => None,
    };

    let noise = noise_power_w(radio);
    let tau_lin = 10f64.powf(tau_db / 10.0);
    let mut system_sum = 0.0;
    let mut d2d_sum = 0.0;
    let mut qos_hits = 0u64;
    let mut qos_total = 0u64;

    for (topo, gains) in topologies {
        let reuse = ReuseAssignment::from_topology(topo)?;
        let num_pairs = reuse.num_pairs();
        let cue_power_w = vec![dbm_to_watt(radio.cue_tx_power_dbm); reuse.num_rbs()];
        let mut reused = vec![false; reuse.num_rbs()];
        for d in 0..num_pairs {
            reused[reuse.rb_of(d)] = true;
        }

        let mut tally = |report: &SinrReport| {
            system_sum += system_throughput(report);
            d2d_sum += d2d_throughput(report);
            for (rb, &shared) in reused.iter().enumerate() {
                if shared {
                    qos_total += 1;
                    if report.cue_sinr_lin[rb] >= tau_lin {
                        qos_hits += 1;
                    }
                }
            }
        };

        match algo {
            Algorithm::Dqn => {
                let policy = policy.expect("checked above");
                let mut state = initial_state(gains, &reuse, radio)?;
                for _ in 0..eval_steps {
                    let actions = policy.greedy_actions(&state, num_pairs)?;
                    let d2d_power_w = actions
                        .iter()
                        .map(|&a| space.action_to_power_w(a))
                        .collect::<Result<Vec<_>>>()?;
                    let alloc =
                        PowerAllocation { cue_power_w: cue_power_w.clone(), d2d_power_w };
                    let report = compute_sinr_report(&alloc, gains, &reuse, noise)?;
                    tally(&report);
                    state = observe_state(&report);
                }
            }
            Algorithm::MaxPower | Algorithm::Olpc => {
                let d2d_power_w = match algo {
                    Algorithm::MaxPower => max_power_policy(num_pairs, radio),
                    _ => olpc_policy(gains, radio, olpc),
                };
                let alloc = PowerAllocation { cue_power_w, d2d_power_w };
                let report = compute_sinr_report(&alloc, gains, &reuse, noise)?;
                // Static policy on a static channel: every step is identical.
                for _ in 0..eval_steps {
                    tally(&report);
                }
            }
        }
    }

    let denom = (topologies.len() * eval_steps) as f64;
    Ok(EvalMetrics {
        system_throughput_bps_hz: system_sum / denom,
        d2d_throughput_bps_hz: d2d_sum / denom,
        cue_qos_rate: if qos_total == 0 { 1.0 } else { qos_hits as f64 / qos_total as f64 },
    })
}
