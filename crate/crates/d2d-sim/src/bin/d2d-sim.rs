//! Command-line front end: train a policy, evaluate one algorithm, or run
//! the full comparison sweep.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use d2d_sim::harness::{load_config, run_sweep, write_results, ExperimentConfig, ResultRow};
use d2d_sim::power::{evaluate, Algorithm, TrainedPolicy, Trainer};
use d2d_sim::topology::draw_topologies;

#[derive(Parser)]
#[command(
    name = "d2d-sim",
    version,
    about = "Single-cell D2D underlay simulator with DQN power control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a DQN policy and save its weights.
    Train {
        /// Experiment config file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Training seed; defaults to the first configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Training episodes.
        #[arg(long)]
        episodes: Option<usize>,
        /// Number of D2D pairs.
        #[arg(long)]
        d2d: Option<usize>,
        /// Weight file destination.
        #[arg(long, default_value = "model.dqn")]
        out: PathBuf,
    },
    /// Evaluate one algorithm on freshly drawn held-out topologies.
    Eval {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Algorithm to score; required unless the config lists exactly one.
        #[arg(long, value_parser = parse_algo)]
        algo: Option<Algorithm>,
        /// Trained weight file; required for dqn.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Topology seed; defaults to the first configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of D2D pairs.
        #[arg(long)]
        d2d: Option<usize>,
        /// Optional single-row CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the (algorithm, D2D count, seed) sweep and write a CSV.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Replaces the configured seed list.
        #[arg(long)]
        seed: Option<u64>,
        /// Training episodes.
        #[arg(long)]
        episodes: Option<usize>,
        /// Replaces the configured D2D count list.
        #[arg(long)]
        d2d: Option<usize>,
        /// CSV destination; overrides output_path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Restrict the sweep to one algorithm.
        #[arg(long, value_parser = parse_algo)]
        algo: Option<Algorithm>,
    },
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|err: d2d_sim::SimError| err.to_string())
}

fn load(path: &Option<PathBuf>) -> anyhow::Result<ExperimentConfig> {
    match path {
        Some(p) => load_config(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(ExperimentConfig::default()),
    }
}

fn run_train(
    config: Option<PathBuf>,
    seed: Option<u64>,
    episodes: Option<usize>,
    d2d: Option<usize>,
    out: PathBuf,
) -> anyhow::Result<()> {
    let mut config = load(&config)?;
    if let Some(m) = episodes {
        config.episodes = m;
    }
    if let Some(d) = d2d {
        config.num_d2d_pairs = d;
    }
    config.validate()?;
    let seed = seed.or_else(|| config.seeds.first().copied()).unwrap_or(0);

    let mut trainer = Trainer::new(
        config.cell(config.num_d2d_pairs),
        config.radio(),
        config.env(),
        config.action_space()?,
        config.dqn(),
        seed,
    )?;
    let curve = trainer.train()?;
    let updates = trainer.train_steps_done();
    let policy = trainer.into_policy();
    policy.save(&out).with_context(|| format!("saving model {}", out.display()))?;

    let tail = curve.len().min(10);
    println!("episodes: {}", curve.len());
    println!("updates: {updates}");
    if tail > 0 {
        let recent: f64 = curve[curve.len() - tail..].iter().sum::<f64>() / tail as f64;
        println!("recent_mean_reward: {recent}");
    }
    println!("model: {}", out.display());
    Ok(())
}

fn run_eval(
    config: Option<PathBuf>,
    algo: Option<Algorithm>,
    model: Option<PathBuf>,
    seed: Option<u64>,
    d2d: Option<usize>,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    let config = load(&config)?;
    let algo = match algo {
        Some(a) => a,
        None if config.algorithms.len() == 1 => config.algorithms[0],
        None => bail!(
            "config lists {} algorithms; pick one with --algo",
            config.algorithms.len()
        ),
    };
    let d2d = d2d.unwrap_or(config.num_d2d_pairs);
    let seed = seed.or_else(|| config.seeds.first().copied()).unwrap_or(0);
    let policy = match (algo, &model) {
        (Algorithm::Dqn, Some(path)) => Some(
            TrainedPolicy::load(path)
                .with_context(|| format!("loading model {}", path.display()))?,
        ),
        (Algorithm::Dqn, None) => bail!("--model is required when evaluating dqn"),
        _ => None,
    };

    let start = Instant::now();
    let topologies = draw_topologies(&config.cell(d2d), config.eval_topologies, seed)?;
    let metrics = evaluate(
        algo,
        policy.as_ref(),
        &topologies,
        &config.radio(),
        &config.action_space()?,
        config.tau_db,
        config.eval_steps,
        &config.olpc(),
    )?;

    println!("algorithm: {algo}");
    println!("d2d_pairs: {d2d}");
    println!("seed: {seed}");
    println!("system_throughput_bps_hz: {}", metrics.system_throughput_bps_hz);
    println!("d2d_throughput_bps_hz: {}", metrics.d2d_throughput_bps_hz);
    println!("cue_qos_rate: {}", metrics.cue_qos_rate);

    if let Some(path) = out {
        let row = ResultRow {
            algorithm: algo,
            d2d_count: d2d,
            seed,
            system_throughput_bps_hz: metrics.system_throughput_bps_hz,
            d2d_throughput_bps_hz: metrics.d2d_throughput_bps_hz,
            cue_qos_rate: metrics.cue_qos_rate,
            wall_time_s: start.elapsed().as_secs_f64(),
        };
        write_results(&path, &[row])?;
        println!("results: {}", path.display());
    }
    Ok(())
}

fn run_full_sweep(
    config: Option<PathBuf>,
    seed: Option<u64>,
    episodes: Option<usize>,
    d2d: Option<usize>,
    out: Option<PathBuf>,
    algo: Option<Algorithm>,
) -> anyhow::Result<()> {
    let mut config = load(&config)?;
    if let Some(s) = seed {
        config.seeds = vec![s];
    }
    if let Some(m) = episodes {
        config.episodes = m;
    }
    if let Some(d) = d2d {
        config.d2d_counts = vec![d];
    }
    if let Some(a) = algo {
        config.algorithms = vec![a];
    }
    if let Some(path) = out {
        config.output_path = path;
    }

    let rows = run_sweep(&config)?;
    write_results(&config.output_path, &rows)?;
    println!("rows: {}", rows.len());
    println!("results: {}", config.output_path.display());
    Ok(())
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Train { config, seed, episodes, d2d, out } => {
            run_train(config, seed, episodes, d2d, out)
        }
        Command::Eval { config, algo, model, seed, d2d, out } => {
            run_eval(config, algo, model, seed, d2d, out)
        }
        Command::Sweep { config, seed, episodes, d2d, out, algo } => {
            run_full_sweep(config, seed, episodes, d2d, out, algo)
        }
    }
}
