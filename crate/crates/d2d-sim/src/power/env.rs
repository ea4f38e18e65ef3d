//! Environment dynamics: joint action in, SINRs, rewards, and the next
//! broadcast state out.

use crate::error::{Result, SimError};
use crate::phy::{
    compute_sinr_report, dbm_to_watt, noise_power_w, PowerAllocation, RadioConfig,
    ReuseAssignment, SinrReport,
};
use crate::power::{observe_state, reward, ActionSpace, AgentState};
use crate::topology::GainTable;

/// Everything one environment step produces.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub report: SinrReport,
    /// One reward per D2D agent, gated on its own RB's CUE.
    pub rewards: Vec<f64>,
    /// The broadcast observation for the next step.
    pub next_state: AgentState,
}

fn cue_allocation(gains: &GainTable, radio: &RadioConfig) -> Vec<f64> {
    vec![dbm_to_watt(radio.cue_tx_power_dbm); gains.g_cue_bs.len()]
}

/// Advances the environment by one step under `joint_action`.
///
/// CUEs transmit at their fixed power; D2D transmitter `d` uses the power
/// level `joint_action[d]`. Each agent's reward couples its own D2D SINR
/// with the SINR of the CUE whose RB it reuses.
pub fn env_step(
    gains: &GainTable,
    reuse: &ReuseAssignment,
    joint_action: &[usize],
    space: &ActionSpace,
    radio: &RadioConfig,
    tau_db: f64,
) -> Result<StepOutcome> {
    if joint_action.len() != reuse.num_pairs() {
        return Err(SimError::Shape(format!(
            "joint action has {} entries for {} D2D pairs",
            joint_action.len(),
            reuse.num_pairs()
        )));
    }
    let d2d_power_w = joint_action
        .iter()
        .map(|&a| space.action_to_power_w(a))
        .collect::<Result<Vec<_>>>()?;
    let alloc = PowerAllocation { cue_power_w: cue_allocation(gains, radio), d2d_power_w };
    let report = compute_sinr_report(&alloc, gains, reuse, noise_power_w(radio))?;

    let rewards = (0..reuse.num_pairs())
        .map(|d| {
            let gamma_c = report.cue_sinr_lin[reuse.rb_of(d)];
            let gamma_d = report.d2d_sinr_lin[d];
            reward(gamma_c, gamma_d, tau_db)
        })
        .collect();
    let next_state = observe_state(&report);
    Ok(StepOutcome { report, rewards, next_state })
}

/// Observation at the start of an episode: all D2D transmitters silent, so
/// the state reflects interference-free CUE SINRs.
pub fn initial_state(
    gains: &GainTable,
    reuse: &ReuseAssignment,
    radio: &RadioConfig,
) -> Result<AgentState> {
    let alloc = PowerAllocation {
        cue_power_w: cue_allocation(gains, radio),
        d2d_power_w: vec![0.0; reuse.num_pairs()],
    };
    let report = compute_sinr_report(&alloc, gains, reuse, noise_power_w(radio))?;
    Ok(observe_state(&report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::{cue_sinr, d2d_sinr};
    use crate::topology::{build_gain_table, place_nodes, CellConfig};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_cell() -> CellConfig {
        CellConfig { num_cues: 4, num_d2d_pairs: 3, ..CellConfig::default() }
    }

    fn instance(seed: u64) -> (GainTable, ReuseAssignment) {
        let config = small_cell();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topo = place_nodes(&config, &mut rng);
        let gains = build_gain_table(&topo, &config, &mut rng).unwrap();
        let reuse = ReuseAssignment::from_topology(&topo).unwrap();
        (gains, reuse)
    }

    #[test]
    fn rewards_match_hand_composed_chain() {
        let (gains, reuse) = instance(1);
        let space = ActionSpace::default();
        let radio = RadioConfig::default();
        let tau = 6.0;
        let actions = vec![0usize; 3];

        let out = env_step(&gains, &reuse, &actions, &space, &radio, tau).unwrap();

        // Recompose each reward from scalar SINR calls.
        let alloc = PowerAllocation {
            cue_power_w: vec![dbm_to_watt(radio.cue_tx_power_dbm); 4],
            d2d_power_w: vec![space.action_to_power_w(0).unwrap(); 3],
        };
        let noise = noise_power_w(&radio);
        for d in 0..3 {
            let gamma_c = cue_sinr(reuse.rb_of(d), &alloc, &gains, &reuse, noise);
            let gamma_d = d2d_sinr(d, &alloc, &gains, &reuse, noise);
            assert_relative_eq!(
                out.rewards[d],
                reward(gamma_c, gamma_d, tau),
                max_relative = 1e-12
            );
        }
        assert_eq!(out.next_state, observe_state(&out.report));
    }

    #[test]
    fn no_pairs_means_no_rewards_and_clean_cues() {
        let config = CellConfig { num_cues: 3, num_d2d_pairs: 0, ..CellConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let topo = place_nodes(&config, &mut rng);
        let gains = build_gain_table(&topo, &config, &mut rng).unwrap();
        let reuse = ReuseAssignment::from_topology(&topo).unwrap();

        let out =
            env_step(&gains, &reuse, &[], &ActionSpace::default(), &RadioConfig::default(), 6.0)
                .unwrap();
        assert!(out.rewards.is_empty());
        assert_eq!(
            out.next_state,
            initial_state(&gains, &reuse, &RadioConfig::default()).unwrap()
        );
    }

    #[test]
    fn initial_state_is_zero_power_observation() {
        let (gains, reuse) = instance(3);
        let radio = RadioConfig::default();
        let state = initial_state(&gains, &reuse, &radio).unwrap();
        assert_eq!(state.normalized_cue_sinr.len(), 4);

        // Zero D2D power leaves CUEs interference-free, so any transmission
        // can only lower the broadcast entries on shared RBs.
        let out = env_step(&gains, &reuse, &[9, 9, 9], &ActionSpace::default(), &radio, 6.0)
            .unwrap();
        for (active, idle) in out.next_state.normalized_cue_sinr.iter().zip(&state.normalized_cue_sinr) {
            assert!(active <= idle);
        }
    }

    #[test]
    fn raising_one_power_never_helps_the_others() {
        let (gains, reuse) = instance(4);
        let space = ActionSpace::default();
        let radio = RadioConfig::default();
        let base = env_step(&gains, &reuse, &[4, 4, 4], &space, &radio, 6.0).unwrap();
        let boosted = env_step(&gains, &reuse, &[9, 4, 4], &space, &radio, 6.0).unwrap();

        for d in 1..3 {
            assert!(boosted.report.d2d_sinr_lin[d] <= base.report.d2d_sinr_lin[d]);
            let rb = reuse.rb_of(d);
            assert!(boosted.report.cue_sinr_lin[rb] <= base.report.cue_sinr_lin[rb]);
        }
    }

    #[test]
    fn rejects_wrong_action_shape_and_range() {
        let (gains, reuse) = instance(5);
        let space = ActionSpace::default();
        let radio = RadioConfig::default();
        assert!(env_step(&gains, &reuse, &[0, 0], &space, &radio, 6.0).is_err());
        assert!(env_step(&gains, &reuse, &[0, 0, 10], &space, &radio, 6.0).is_err());
    }

    #[test]
    fn reward_bounds_and_qos_gate_hold_over_random_steps() {
        // 10^5 environment steps across random topologies and actions: the
        // reward stays in [-1, 2 log2(1 + 10^5)], and whenever the shared-RB
        // CUE misses the threshold the reward is exactly -1.
        let config = small_cell();
        let space = ActionSpace::default();
        let radio = RadioConfig::default();
        let tau = 6.0;
        let bound = 2.0 * (1.0 + 1e5f64).log2() + 1e-9;
        let mut rng = ChaCha8Rng::seed_from_u64(6);

        let mut steps = 0usize;
        while steps < 100_000 {
            let topo = place_nodes(&config, &mut rng);
            let gains = build_gain_table(&topo, &config, &mut rng).unwrap();
            let reuse = ReuseAssignment::from_topology(&topo).unwrap();
            for _ in 0..50 {
                let actions: Vec<usize> = (0..3).map(|_| rng.gen_range(0..10)).collect();
                let out = env_step(&gains, &reuse, &actions, &space, &radio, tau).unwrap();
                for d in 0..3 {
                    let r = out.rewards[d];
                    assert!((-1.0..=bound).contains(&r), "reward {r} out of bounds");
                    let gamma_c = out.report.cue_sinr_lin[reuse.rb_of(d)];
                    if 10.0 * gamma_c.log10() < tau {
                        assert_eq!(r, -1.0);
                    }
                }
                steps += 1;
            }
        }
    }
}
