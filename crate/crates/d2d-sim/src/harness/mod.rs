//! Experiment harness: key-value configuration, seeded sweeps over D2D
//! counts, and CSV emission.

pub mod config;
pub mod csv;
pub mod sweep;

pub use config::{load_config, parse_config, ExperimentConfig};
pub use csv::{render_results, write_results, RESULTS_HEADER};
pub use sweep::{run_sweep, ResultRow};
