//! Result serialization. Floats use Rust's shortest-roundtrip formatting,
//! so reparsing a value reproduces the exact f64.

use std::fs;
use std::path::Path;

use crate::error::{Result, SimError};
use crate::harness::ResultRow;

pub const RESULTS_HEADER: &str =
    "algorithm,d2d_count,seed,system_throughput_bps_hz,d2d_throughput_bps_hz,cue_qos_rate,wall_time_s";

pub fn render_results(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{:?},{:?},{:?},{:?}\n",
            row.algorithm,
            row.d2d_count,
            row.seed,
            row.system_throughput_bps_hz,
            row.d2d_throughput_bps_hz,
            row.cue_qos_rate,
            row.wall_time_s,
        ));
    }
    out
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    fs::write(path, render_results(rows)).map_err(|err| SimError::io(path, err))
}
