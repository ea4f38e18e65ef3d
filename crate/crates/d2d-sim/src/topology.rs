//! Cell geometry and link gains.
//!
//! A single macro cell: the base station sits at the origin, cellular users
//! (CUEs) and D2D pairs are dropped uniformly at random inside the cell
//! radius. Two empirical path-loss models are used, one for BS-to-user links
//! and one for user-to-user links, both over distance in kilometers. Gains
//! are linear power ratios including antenna gains and optional log-normal
//! shadowing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, SimError};

/// Links shorter than this are evaluated at this distance. The user-user
/// path-loss model goes negative (gain > 1) as d -> 0, so a floor keeps
/// gains bounded.
pub const MIN_LINK_DIST_M: f64 = 10.0;

/// Cell layout and propagation parameters.
#[derive(Debug, Clone)]
pub struct CellConfig {
    /// Cell radius (m); users are dropped inside this disk.
    pub cell_radius_m: f64,
    /// Maximum distance between a D2D transmitter and its receiver (m).
    pub d2d_max_dist_m: f64,
    /// Number of cellular users C. One resource block per CUE.
    pub num_cues: usize,
    /// Number of D2D pairs D.
    pub num_d2d_pairs: usize,
    /// Macro BS antenna gain (dBi).
    pub bs_antenna_gain_dbi: f64,
    /// User terminal antenna gain (dBi).
    pub ue_antenna_gain_dbi: f64,
    /// Log-normal shadowing standard deviation (dB); 0 disables shadowing.
    pub shadowing_sigma_db: f64,
}

impl Default for CellConfig {
    fn default() -> Self {
        Self {
            cell_radius_m: 500.0,
            d2d_max_dist_m: 50.0,
            num_cues: 30,
            num_d2d_pairs: 10,
            bs_antenna_gain_dbi: 17.0,
            ue_antenna_gain_dbi: 4.0,
            shadowing_sigma_db: 0.0,
        }
    }
}

impl CellConfig {
    /// Checks every invariant, naming the offending field on failure.
    pub fn validate(&self) -> Result<()> {
        if !self.cell_radius_m.is_finite() || self.cell_radius_m <= 0.0 {
            return Err(SimError::InvalidConfig {
                field: "cell_radius_m",
                reason: format!("must be positive, got {}", self.cell_radius_m),
            });
        }
        if !self.d2d_max_dist_m.is_finite()
            || self.d2d_max_dist_m <= 0.0
            || self.d2d_max_dist_m >= self.cell_radius_m
        {
            return Err(SimError::InvalidConfig {
                field: "d2d_max_dist_m",
                reason: format!(
                    "must be in (0, cell_radius_m), got {}",
                    self.d2d_max_dist_m
                ),
            });
        }
        if self.num_cues < 1 {
            return Err(SimError::InvalidConfig {
                field: "num_cues",
                reason: "must be at least 1".into(),
            });
        }
        if !self.shadowing_sigma_db.is_finite() || self.shadowing_sigma_db < 0.0 {
            return Err(SimError::InvalidConfig {
                field: "shadowing_sigma_db",
                reason: format!("must be finite and >= 0, got {}", self.shadowing_sigma_db),
            });
        }
        for (field, v) in [
            ("bs_antenna_gain_dbi", self.bs_antenna_gain_dbi),
            ("ue_antenna_gain_dbi", self.ue_antenna_gain_dbi),
        ] {
            if !v.is_finite() {
                return Err(SimError::InvalidConfig {
                    field,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Node positions and the RB each D2D pair reuses. The BS is at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    /// Base station position (m); always the origin.
    pub bs_pos: [f64; 2],
    /// CUE positions (m).
    pub cue_pos: Vec<[f64; 2]>,
    /// D2D transmitter positions (m).
    pub d2d_tx_pos: Vec<[f64; 2]>,
    /// D2D receiver positions (m).
    pub d2d_rx_pos: Vec<[f64; 2]>,
    /// Resource block index reused by each D2D pair. RB k is CUE k's uplink.
    pub rb_of_pair: Vec<usize>,
}

impl Topology {
    pub fn num_cues(&self) -> usize {
        self.cue_pos.len()
    }

    pub fn num_d2d_pairs(&self) -> usize {
        self.d2d_tx_pos.len()
    }
}

/// Linear channel gains for every link the SINR expressions need.
#[derive(Debug, Clone, PartialEq)]
pub struct GainTable {
    /// CUE c -> BS (desired uplink).
    pub g_cue_bs: Vec<f64>,
    /// D2D transmitter i -> BS (uplink interference).
    pub g_d2dtx_bs: Vec<f64>,
    /// D2D transmitter i -> its own receiver (desired D2D link).
    pub g_d2d_link: Vec<f64>,
    /// CUE c -> D2D receiver j, indexed `[c][j]`.
    pub g_cue_d2drx: Vec<Vec<f64>>,
    /// D2D transmitter i -> D2D receiver j, indexed `[i][j]`. The diagonal
    /// equals `g_d2d_link`.
    pub g_d2dtx_d2drx: Vec<Vec<f64>>,
}

fn dist_m(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Uniform point in the disk of radius `r` around `center`.
fn sample_disk(center: [f64; 2], r: f64, rng: &mut impl Rng) -> [f64; 2] {
    let radius = r * rng.gen::<f64>().sqrt();
    let angle = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    [center[0] + radius * angle.cos(), center[1] + radius * angle.sin()]
}

/// Drops all users uniformly at random inside the cell.
///
/// Each D2D receiver is uniform in the disk of radius `d2d_max_dist_m`
/// around its transmitter, resampled until it also falls inside the cell.
/// RB assignment is a uniform random injection into `0..num_cues` when
/// `D <= C`, uniform with replacement otherwise.
pub fn place_nodes(config: &CellConfig, rng: &mut impl Rng) -> Topology {
    let bs_pos = [0.0, 0.0];
    let cue_pos: Vec<[f64; 2]> = (0..config.num_cues)
        .map(|_| sample_disk(bs_pos, config.cell_radius_m, rng))
        .collect();

    let mut d2d_tx_pos = Vec::with_capacity(config.num_d2d_pairs);
    let mut d2d_rx_pos = Vec::with_capacity(config.num_d2d_pairs);
    for _ in 0..config.num_d2d_pairs {
        let tx = sample_disk(bs_pos, config.cell_radius_m, rng);
        let rx = loop {
            let candidate = sample_disk(tx, config.d2d_max_dist_m, rng);
            if dist_m(candidate, bs_pos) <= config.cell_radius_m {
                break candidate;
            }
        };
        d2d_tx_pos.push(tx);
        d2d_rx_pos.push(rx);
    }

    let rb_of_pair = if config.num_d2d_pairs <= config.num_cues {
        rand::seq::index::sample(rng, config.num_cues, config.num_d2d_pairs).into_vec()
    } else {
        (0..config.num_d2d_pairs)
            .map(|_| rng.gen_range(0..config.num_cues))
            .collect()
    };

    Topology { bs_pos, cue_pos, d2d_tx_pos, d2d_rx_pos, rb_of_pair }
}

/// Path loss (dB) between the BS and a user: `15.3 + 36.6 log10(d_km)`.
///
/// The distance is floored at [`MIN_LINK_DIST_M`] before evaluation.
pub fn pathloss_bs_user(d_km: f64) -> Result<f64> {
    let d = floor_dist_km(d_km)?;
    Ok(15.3 + 36.6 * d.log10())
}

/// Path loss (dB) between two users: `28 + 40 log10(d_km)`.
///
/// The distance is floored at [`MIN_LINK_DIST_M`] before evaluation.
pub fn pathloss_user_user(d_km: f64) -> Result<f64> {
    let d = floor_dist_km(d_km)?;
    Ok(28.0 + 40.0 * d.log10())
}

fn floor_dist_km(d_km: f64) -> Result<f64> {
    if !d_km.is_finite() || d_km <= 0.0 {
        return Err(SimError::Domain(format!(
            "link distance must be positive and finite, got {d_km} km"
        )));
    }
    Ok(d_km.max(MIN_LINK_DIST_M / 1000.0))
}

/// Linear gain of a link: `10^((tx_dbi + rx_dbi - pl_db - shadow_db) / 10)`.
pub fn link_gain(pl_db: f64, shadow_db: f64, tx_gain_dbi: f64, rx_gain_dbi: f64) -> f64 {
    10f64.powf((tx_gain_dbi + rx_gain_dbi - pl_db - shadow_db) / 10.0)
}

/// Computes the gain of every link in the topology.
///
/// BS-involving links use the BS-user path-loss model with BS + UE antenna
/// gains; user-user links use the user-user model with UE + UE gains. Each
/// link gets an independent zero-mean Gaussian shadowing draw with
/// `shadowing_sigma_db`; sigma 0 disables shadowing and makes the table a
/// deterministic function of the positions.
pub fn build_gain_table(
    topology: &Topology,
    config: &CellConfig,
    rng: &mut impl Rng,
) -> Result<GainTable> {
    let sigma = config.shadowing_sigma_db;
    let normal = if sigma > 0.0 {
        Some(Normal::new(0.0, sigma).expect("validated sigma"))
    } else {
        None
    };
    let shadow = |rng: &mut dyn rand::RngCore| -> f64 {
        match &normal {
            Some(n) => n.sample(rng),
            None => 0.0,
        }
    };
    let bs_ue = (config.bs_antenna_gain_dbi, config.ue_antenna_gain_dbi);
    let ue_ue = (config.ue_antenna_gain_dbi, config.ue_antenna_gain_dbi);

    let gain = |d_m: f64, bs_link: bool, rng: &mut dyn rand::RngCore| -> Result<f64> {
        let d_km = d_m / 1000.0;
        let (pl, (tx, rx)) = if bs_link {
            (pathloss_bs_user(d_km)?, bs_ue)
        } else {
            (pathloss_user_user(d_km)?, ue_ue)
        };
        Ok(link_gain(pl, shadow(rng), tx, rx))
    };

    let g_cue_bs = topology
        .cue_pos
        .iter()
        .map(|&p| gain(dist_m(p, topology.bs_pos), true, rng))
        .collect::<Result<Vec<_>>>()?;
    let g_d2dtx_bs = topology
        .d2d_tx_pos
        .iter()
        .map(|&p| gain(dist_m(p, topology.bs_pos), true, rng))
        .collect::<Result<Vec<_>>>()?;
    let g_d2d_link = topology
        .d2d_tx_pos
        .iter()
        .zip(&topology.d2d_rx_pos)
        .map(|(&tx, &rx)| gain(dist_m(tx, rx), false, rng))
        .collect::<Result<Vec<_>>>()?;

    let d = topology.num_d2d_pairs();
    let mut g_cue_d2drx = Vec::with_capacity(topology.num_cues());
    for &cue in &topology.cue_pos {
        let row = topology
            .d2d_rx_pos
            .iter()
            .map(|&rx| gain(dist_m(cue, rx), false, rng))
            .collect::<Result<Vec<_>>>()?;
        g_cue_d2drx.push(row);
    }

    let mut g_d2dtx_d2drx = vec![vec![0.0; d]; d];
    for (i, row) in g_d2dtx_d2drx.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = if i == j {
                // Same physical link as g_d2d_link: reuse the draw.
                g_d2d_link[i]
            } else {
                gain(dist_m(topology.d2d_tx_pos[i], topology.d2d_rx_pos[j]), false, rng)?
            };
        }
    }

    Ok(GainTable { g_cue_bs, g_d2dtx_bs, g_d2d_link, g_cue_d2drx, g_d2dtx_d2drx })
}

/// Draws `count` independent (topology, gain table) instances from one seed.
pub fn draw_topologies(
    config: &CellConfig,
    count: usize,
    seed: u64,
) -> Result<Vec<(Topology, GainTable)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let topology = place_nodes(config, &mut rng);
            let gains = build_gain_table(&topology, config, &mut rng)?;
            Ok((topology, gains))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn pathloss_bs_user_known_values() {
        assert_abs_diff_eq!(pathloss_bs_user(1.0).unwrap(), 15.3, epsilon = 1e-12);
        assert_abs_diff_eq!(pathloss_bs_user(10.0).unwrap(), 51.9, epsilon = 1e-12);
        // 15.3 + 36.6*log10(0.5)
        assert_abs_diff_eq!(pathloss_bs_user(0.5).unwrap(), 4.282302158698288, epsilon = 1e-9);
    }

    #[test]
    fn pathloss_user_user_known_values() {
        assert_abs_diff_eq!(pathloss_user_user(1.0).unwrap(), 28.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pathloss_user_user(0.1).unwrap(), -12.0, epsilon = 1e-12);
        // 28 + 40*log10(0.05)
        assert_abs_diff_eq!(pathloss_user_user(0.05).unwrap(), -24.041199826559248, epsilon = 1e-9);
    }

    #[test]
    fn pathloss_rejects_non_positive_distance() {
        assert!(pathloss_bs_user(0.0).is_err());
        assert!(pathloss_bs_user(-1.0).is_err());
        assert!(pathloss_user_user(0.0).is_err());
        assert!(pathloss_user_user(f64::NAN).is_err());
    }

    #[test]
    fn pathloss_floors_short_links() {
        let floor_km = MIN_LINK_DIST_M / 1000.0;
        assert_eq!(pathloss_user_user(1e-6).unwrap(), pathloss_user_user(floor_km).unwrap());
        assert_eq!(pathloss_bs_user(1e-6).unwrap(), pathloss_bs_user(floor_km).unwrap());
    }

    #[test]
    fn link_gain_known_values() {
        assert_abs_diff_eq!(link_gain(0.0, 0.0, 0.0, 0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(link_gain(10.0, 0.0, 0.0, 0.0), 0.1, epsilon = 1e-15);
        // 10^(( 17 + 4 - 15.3 ) / 10) = 10^0.57
        assert_abs_diff_eq!(link_gain(15.3, 0.0, 17.0, 4.0), 3.715352290971724, epsilon = 1e-9);
    }

    #[test]
    fn place_nodes_empty_d2d() {
        let config = CellConfig { num_d2d_pairs: 0, ..CellConfig::default() };
        let topo = place_nodes(&config, &mut rng(1));
        assert_eq!(topo.num_cues(), 30);
        assert!(topo.d2d_tx_pos.is_empty());
        assert!(topo.d2d_rx_pos.is_empty());
        assert!(topo.rb_of_pair.is_empty());
    }

    #[test]
    fn place_nodes_is_deterministic() {
        let config = CellConfig::default();
        let a = place_nodes(&config, &mut rng(7));
        let b = place_nodes(&config, &mut rng(7));
        assert_eq!(a, b);
    }

    #[test]
    fn place_nodes_mean_cue_distance_matches_uniform_disk() {
        // For a uniform draw in a disk of radius R the mean distance from the
        // center is 2R/3.
        let config = CellConfig { num_cues: 1, num_d2d_pairs: 0, ..CellConfig::default() };
        let mut r = rng(1234);
        let n = 10_000;
        let mean = (0..n)
            .map(|_| {
                let t = place_nodes(&config, &mut r);
                dist_m(t.cue_pos[0], t.bs_pos)
            })
            .sum::<f64>()
            / n as f64;
        let expected = 2.0 * config.cell_radius_m / 3.0;
        assert!(
            (mean - expected).abs() / expected < 0.02,
            "mean {mean} vs expected {expected}"
        );
    }

    #[test]
    fn place_nodes_invariants_hold_over_many_seeds() {
        let config = CellConfig {
            num_cues: 5,
            num_d2d_pairs: 3,
            ..CellConfig::default()
        };
        for seed in 0..10_000u64 {
            let t = place_nodes(&config, &mut rng(seed));
            for &p in t.cue_pos.iter().chain(&t.d2d_tx_pos).chain(&t.d2d_rx_pos) {
                assert!(dist_m(p, t.bs_pos) <= config.cell_radius_m + 1e-9);
            }
            for i in 0..t.num_d2d_pairs() {
                assert!(dist_m(t.d2d_tx_pos[i], t.d2d_rx_pos[i]) <= config.d2d_max_dist_m + 1e-9);
                assert!(t.rb_of_pair[i] < config.num_cues);
            }
            // D <= C: the assignment is an injection.
            let mut rbs = t.rb_of_pair.clone();
            rbs.sort_unstable();
            rbs.dedup();
            assert_eq!(rbs.len(), t.num_d2d_pairs());
        }
    }

    #[test]
    fn place_nodes_assigns_with_replacement_when_d_exceeds_c() {
        let config = CellConfig {
            num_cues: 2,
            num_d2d_pairs: 6,
            ..CellConfig::default()
        };
        let t = place_nodes(&config, &mut rng(3));
        assert_eq!(t.rb_of_pair.len(), 6);
        assert!(t.rb_of_pair.iter().all(|&rb| rb < 2));
    }

    #[test]
    fn gain_table_matches_per_link_recomposition() {
        // Colinear layout: CUE at 200 m, D2D tx at 400 m with rx 30 m further
        // out along the x axis. Shadowing off.
        let config = CellConfig {
            num_cues: 1,
            num_d2d_pairs: 1,
            shadowing_sigma_db: 0.0,
            ..CellConfig::default()
        };
        let topo = Topology {
            bs_pos: [0.0, 0.0],
            cue_pos: vec![[200.0, 0.0]],
            d2d_tx_pos: vec![[400.0, 0.0]],
            d2d_rx_pos: vec![[430.0, 0.0]],
            rb_of_pair: vec![0],
        };
        let table = build_gain_table(&topo, &config, &mut rng(0)).unwrap();

        let bs_ue = |d_km: f64| {
            link_gain(pathloss_bs_user(d_km).unwrap(), 0.0, 17.0, 4.0)
        };
        let ue_ue = |d_km: f64| {
            link_gain(pathloss_user_user(d_km).unwrap(), 0.0, 4.0, 4.0)
        };
        assert_relative_eq!(table.g_cue_bs[0], bs_ue(0.2), max_relative = 1e-12);
        assert_relative_eq!(table.g_d2dtx_bs[0], bs_ue(0.4), max_relative = 1e-12);
        assert_relative_eq!(table.g_d2d_link[0], ue_ue(0.03), max_relative = 1e-12);
        assert_relative_eq!(table.g_cue_d2drx[0][0], ue_ue(0.23), max_relative = 1e-12);
        assert_relative_eq!(table.g_d2dtx_d2drx[0][0], ue_ue(0.03), max_relative = 1e-12);
    }

    #[test]
    fn gain_table_deterministic_without_shadowing() {
        let config = CellConfig { num_cues: 4, num_d2d_pairs: 2, ..CellConfig::default() };
        let topo = place_nodes(&config, &mut rng(42));
        let a = build_gain_table(&topo, &config, &mut rng(0)).unwrap();
        let b = build_gain_table(&topo, &config, &mut rng(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gain_drops_when_distance_doubles() {
        let config = CellConfig { num_cues: 1, num_d2d_pairs: 0, ..CellConfig::default() };
        let near = Topology {
            bs_pos: [0.0, 0.0],
            cue_pos: vec![[100.0, 0.0]],
            d2d_tx_pos: vec![],
            d2d_rx_pos: vec![],
            rb_of_pair: vec![],
        };
        let mut far = near.clone();
        far.cue_pos[0] = [200.0, 0.0];
        let g_near = build_gain_table(&near, &config, &mut rng(0)).unwrap().g_cue_bs[0];
        let g_far = build_gain_table(&far, &config, &mut rng(0)).unwrap().g_cue_bs[0];
        assert!(g_far < g_near);
    }

    #[test]
    fn gain_table_entries_positive_and_finite_over_many_seeds() {
        let config = CellConfig {
            num_cues: 4,
            num_d2d_pairs: 3,
            shadowing_sigma_db: 8.0,
            ..CellConfig::default()
        };
        for seed in 0..10_000u64 {
            let mut r = rng(seed);
            let topo = place_nodes(&config, &mut r);
            let t = build_gain_table(&topo, &config, &mut r).unwrap();
            let all = t
                .g_cue_bs
                .iter()
                .chain(&t.g_d2dtx_bs)
                .chain(&t.g_d2d_link)
                .chain(t.g_cue_d2drx.iter().flatten())
                .chain(t.g_d2dtx_d2drx.iter().flatten());
            for &g in all {
                assert!(g.is_finite() && g > 0.0, "seed {seed}: bad gain {g}");
            }
        }
    }

    #[test]
    fn config_validation_names_bad_field() {
        let config = CellConfig { cell_radius_m: -5.0, ..CellConfig::default() };
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("cell_radius_m"), "{err}");
    }

    proptest! {
        // Exponent additivity: gains multiply when path losses add.
        #[test]
        fn link_gain_exponent_additivity(pl in -50.0..200.0f64, q in -50.0..200.0f64) {
            let lhs = link_gain(pl, 0.0, 0.0, 0.0) * link_gain(q, 0.0, 0.0, 0.0);
            let rhs = link_gain(pl + q, 0.0, 0.0, 0.0);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        }

        // Both path-loss models are strictly increasing in distance past the floor.
        #[test]
        fn pathloss_monotone_in_distance(
            d1 in 0.011..5.0f64,
            scale in 1.001..10.0f64,
        ) {
            let d2 = d1 * scale;
            prop_assert!(pathloss_bs_user(d2).unwrap() > pathloss_bs_user(d1).unwrap());
            prop_assert!(pathloss_user_user(d2).unwrap() > pathloss_user_user(d1).unwrap());
        }
    }
}
