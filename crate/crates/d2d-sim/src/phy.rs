//! Per-resource-block SINR and Shannon throughput.
//!
//! The uplink-reuse scenario: each CUE transmits to the BS on its own RB,
//! and each D2D pair reuses exactly one CUE's RB. At the BS the CUE signal
//! is interfered by every D2D transmitter sharing the RB; at a D2D receiver
//! the desired link is interfered by the co-channel CUE and by the other
//! co-channel D2D transmitters. All computations here are pure functions of
//! powers and gains.

use crate::error::{Result, SimError};
use crate::topology::{GainTable, Topology};

/// Noise floor and transmit power limits.
#[derive(Debug, Clone)]
pub struct RadioConfig {
    /// Thermal noise spectral density (dBm/Hz).
    pub noise_density_dbm_hz: f64,
    /// Resource block bandwidth (Hz); the noise floor integrates over this.
    pub rb_bandwidth_hz: f64,
    /// Maximum transmit power of any user (dBm).
    pub p_max_dbm: f64,
    /// Fixed CUE transmit power (dBm).
    pub cue_tx_power_dbm: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            noise_density_dbm_hz: -176.0,
            rb_bandwidth_hz: 180_000.0,
            p_max_dbm: 23.0,
            cue_tx_power_dbm: 23.0,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.rb_bandwidth_hz.is_finite() || self.rb_bandwidth_hz <= 0.0 {
            return Err(SimError::InvalidConfig {
                field: "rb_bandwidth_hz",
                reason: format!("must be positive, got {}", self.rb_bandwidth_hz),
            });
        }
        if !self.noise_density_dbm_hz.is_finite() {
            return Err(SimError::InvalidConfig {
                field: "noise_density_dbm_hz",
                reason: format!("must be finite, got {}", self.noise_density_dbm_hz),
            });
        }
        if !self.p_max_dbm.is_finite() {
            return Err(SimError::InvalidConfig {
                field: "p_max_dbm",
                reason: format!("must be finite, got {}", self.p_max_dbm),
            });
        }
        if !self.cue_tx_power_dbm.is_finite() || self.cue_tx_power_dbm > self.p_max_dbm {
            return Err(SimError::InvalidConfig {
                field: "cue_tx_power_dbm",
                reason: format!(
                    "must be finite and <= p_max_dbm ({}), got {}",
                    self.p_max_dbm, self.cue_tx_power_dbm
                ),
            });
        }
        Ok(())
    }
}

/// Transmit powers in watts for one scheduling instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    /// Per-CUE transmit power (W); index c is the CUE owning RB c.
    pub cue_power_w: Vec<f64>,
    /// Per-D2D-transmitter power (W).
    pub d2d_power_w: Vec<f64>,
}

/// Which RB each D2D pair reuses.
///
/// Stored as one RB index per pair, so "each pair reuses exactly one RB"
/// holds structurally: the implicit binary indicator x[pair][rb] has exactly
/// one 1 per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ReuseAssignment {
    rb_of_pair: Vec<usize>,
    num_rbs: usize,
}

impl ReuseAssignment {
    pub fn new(rb_of_pair: Vec<usize>, num_rbs: usize) -> Result<Self> {
        if let Some(&rb) = rb_of_pair.iter().find(|&&rb| rb >= num_rbs) {
            return Err(SimError::Shape(format!(
                "reuse assignment references RB {rb} but only {num_rbs} RBs exist"
            )));
        }
        Ok(Self { rb_of_pair, num_rbs })
    }

    pub fn from_topology(topology: &Topology) -> Result<Self> {
        Self::new(topology.rb_of_pair.clone(), topology.num_cues())
    }

    pub fn num_pairs(&self) -> usize {
        self.rb_of_pair.len()
    }

    pub fn num_rbs(&self) -> usize {
        self.num_rbs
    }

    /// RB index reused by `pair`.
    pub fn rb_of(&self, pair: usize) -> usize {
        self.rb_of_pair[pair]
    }

    /// True iff `pair` reuses `rb` (the x = 1 entries).
    pub fn reuses(&self, pair: usize, rb: usize) -> bool {
        self.rb_of_pair[pair] == rb
    }
}

/// Linear SINRs for every CUE and every D2D pair at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    pub cue_sinr_lin: Vec<f64>,
    pub d2d_sinr_lin: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Unit conversions and noise
// ---------------------------------------------------------------------------

/// dBm to watts: `10^((p_dbm - 30) / 10)`.
pub fn dbm_to_watt(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

/// Watts to dBm; requires a strictly positive power.
pub fn watt_to_dbm(p_w: f64) -> Result<f64> {
    if !p_w.is_finite() || p_w <= 0.0 {
        return Err(SimError::Domain(format!(
            "watt_to_dbm requires positive finite power, got {p_w}"
        )));
    }
    Ok(10.0 * p_w.log10() + 30.0)
}

/// Noise power over one RB (W): the spectral density integrated over the RB
/// bandwidth, `dbm_to_watt(density + 10 log10(bandwidth))`.
pub fn noise_power_w(config: &RadioConfig) -> f64 {
    dbm_to_watt(config.noise_density_dbm_hz + 10.0 * config.rb_bandwidth_hz.log10())
}

// ---------------------------------------------------------------------------
// SINR
// ---------------------------------------------------------------------------

/// Linear SINR of the CUE owning `rb`, received at the BS.
///
/// `p_c g_c / (sigma2 + sum_i p_i g_i)` over D2D transmitters i sharing the
/// RB. Shapes must already be consistent; the denominator is at least
/// `noise_w`, so the result is finite whenever `noise_w > 0`.
pub fn cue_sinr(
    rb: usize,
    alloc: &PowerAllocation,
    gains: &GainTable,
    reuse: &ReuseAssignment,
    noise_w: f64,
) -> f64 {
    let signal = alloc.cue_power_w[rb] * gains.g_cue_bs[rb];
    let mut denom = noise_w;
    for pair in 0..reuse.num_pairs() {
        if reuse.reuses(pair, rb) {
            denom += alloc.d2d_power_w[pair] * gains.g_d2dtx_bs[pair];
        }
    }
    signal / denom
}

/// Linear SINR of D2D pair `pair` at its receiver.
///
/// Desired link over noise, the co-channel CUE, and every other D2D
/// transmitter sharing the pair's RB.
pub fn d2d_sinr(
    pair: usize,
    alloc: &PowerAllocation,
    gains: &GainTable,
    reuse: &ReuseAssignment,
    noise_w: f64,
) -> f64 {
    let rb = reuse.rb_of(pair);
    let signal = alloc.d2d_power_w[pair] * gains.g_d2d_link[pair];
    let mut denom = noise_w + alloc.cue_power_w[rb] * gains.g_cue_d2drx[rb][pair];
    for other in 0..reuse.num_pairs() {
        if other != pair && reuse.reuses(other, rb) {
            denom += alloc.d2d_power_w[other] * gains.g_d2dtx_d2drx[other][pair];
        }
    }
    signal / denom
}

/// Evaluates [`cue_sinr`] for every RB and [`d2d_sinr`] for every pair.
pub fn compute_sinr_report(
    alloc: &PowerAllocation,
    gains: &GainTable,
    reuse: &ReuseAssignment,
    noise_w: f64,
) -> Result<SinrReport> {
    let c = gains.g_cue_bs.len();
    let d = gains.g_d2d_link.len();
    if alloc.cue_power_w.len() != c
        || alloc.d2d_power_w.len() != d
        || reuse.num_pairs() != d
        || reuse.num_rbs() != c
        || gains.g_d2dtx_bs.len() != d
        || gains.g_cue_d2drx.len() != c
    {
        return Err(SimError::Shape(format!(
            "allocation ({}/{}) and reuse ({}/{}) must match gains ({c} CUEs, {d} pairs)",
            alloc.cue_power_w.len(),
            alloc.d2d_power_w.len(),
            reuse.num_rbs(),
            reuse.num_pairs(),
        )));
    }
    let cue_sinr_lin = (0..c).map(|rb| cue_sinr(rb, alloc, gains, reuse, noise_w)).collect();
    let d2d_sinr_lin = (0..d).map(|p| d2d_sinr(p, alloc, gains, reuse, noise_w)).collect();
    Ok(SinrReport { cue_sinr_lin, d2d_sinr_lin })
}

// ---------------------------------------------------------------------------
// Throughput
// ---------------------------------------------------------------------------

/// System spectral efficiency (bit/s/Hz): `sum_c log2(1+g_c) + sum_d log2(1+g_d)`.
///
/// Multiply by the RB bandwidth for bit/s.
pub fn system_throughput(report: &SinrReport) -> f64 {
    let cue: f64 = report.cue_sinr_lin.iter().map(|&g| (1.0 + g).log2()).sum();
    cue + d2d_throughput(report)
}

/// D2D-only spectral efficiency (bit/s/Hz).
pub fn d2d_throughput(report: &SinrReport) -> f64 {
    report.d2d_sinr_lin.iter().map(|&g| (1.0 + g).log2()).sum()
}
