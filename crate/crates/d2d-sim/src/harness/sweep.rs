//! Seeded sweep over (algorithm, D2D count, seed) cells.
//!
//! Each cell owns derived random streams, so cells are order-independent
//! and safe to run in parallel. Within a cell all algorithms are scored on
//! the same held-out topology draws; the DQN trains a fresh network first.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::Result;
use crate::harness::ExperimentConfig;
use crate::power::{evaluate, Algorithm, Trainer};
use crate::topology::draw_topologies;

/// One evaluated sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub algorithm: Algorithm,
    pub d2d_count: usize,
    pub seed: u64,
    pub system_throughput_bps_hz: f64,
    pub d2d_throughput_bps_hz: f64,
    pub cue_qos_rate: f64,
    pub wall_time_s: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derived stream seed: stream 0 trains, stream 1 draws evaluation
/// topologies. Keyed on (seed, D) so cells never share randomness.
fn derive_seed(seed: u64, d2d_count: usize, stream: u64) -> u64 {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ d2d_count as u64);
    splitmix64(h ^ stream)
}

fn run_cell(config: &ExperimentConfig, d2d_count: usize, seed: u64) -> Result<Vec<ResultRow>> {
    let radio = config.radio();
    let space = config.action_space()?;
    let olpc = config.olpc();
    let topologies = draw_topologies(
        &config.cell(d2d_count),
        config.eval_topologies,
        derive_seed(seed, d2d_count, 1),
    )?;

    let mut rows = Vec::with_capacity(config.algorithms.len());
    for &algorithm in &config.algorithms {
        let start = Instant::now();
        let policy = match algorithm {
            Algorithm::Dqn => {
                let mut trainer = Trainer::new(
                    config.cell(d2d_count),
                    radio.clone(),
                    config.env(),
                    space.clone(),
                    config.dqn(),
                    derive_seed(seed, d2d_count, 0),
                )?;
                trainer.train()?;
                Some(trainer.into_policy())
            }
            _ => None,
        };
        let metrics = evaluate(
            algorithm,
            policy.as_ref(),
            &topologies,
            &radio,
            &space,
            config.tau_db,
            config.eval_steps,
            &olpc,
        )?;
        rows.push(ResultRow {
            algorithm,
            d2d_count,
            seed,
            system_throughput_bps_hz: metrics.system_throughput_bps_hz,
            d2d_throughput_bps_hz: metrics.d2d_throughput_bps_hz,
            cue_qos_rate: metrics.cue_qos_rate,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }
    Ok(rows)
}

/// Runs every (d2d_count, seed) cell and returns rows ordered by D2D count,
/// then seed, then the configured algorithm order. Apart from `wall_time_s`
/// the output is a pure function of the config.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let cells: Vec<(usize, u64)> = config
        .d2d_counts
        .iter()
        .flat_map(|&d| config.seeds.iter().map(move |&s| (d, s)))
        .collect();
    let per_cell: Vec<Result<Vec<ResultRow>>> = cells
        .par_iter()
        .map(|&(d2d_count, seed)| run_cell(config, d2d_count, seed))
        .collect();
    let mut rows = Vec::with_capacity(cells.len() * config.algorithms.len());
    for cell_rows in per_cell {
        rows.extend(cell_rows?);
    }
    Ok(rows)
}
