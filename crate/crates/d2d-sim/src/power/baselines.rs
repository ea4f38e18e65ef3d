//! Non-learning power policies used for comparison.

use crate::phy::{dbm_to_watt, RadioConfig};
use crate::topology::GainTable;

/// Open-loop fractional power control constants.
#[derive(Debug, Clone)]
pub struct OlpcParams {
    /// Target received power baseline P0 (dBm).
    pub p0_dbm: f64,
    /// Path-loss compensation fraction in [0, 1].
    pub alpha: f64,
}

impl Default for OlpcParams {
    fn default() -> Self {
        Self { p0_dbm: -78.0, alpha: 0.8 }
    }
}

/// Every D2D transmitter at the power cap.
pub fn max_power_policy(num_pairs: usize, radio: &RadioConfig) -> Vec<f64> {
    vec![dbm_to_watt(radio.p_max_dbm); num_pairs]
}

/// Open-loop transmit power: `min(p_max, P0 + alpha * PL)` in dBm.
pub fn olpc_power_dbm(pl_db: f64, params: &OlpcParams, p_max_dbm: f64) -> f64 {
    (params.p0_dbm + params.alpha * pl_db).min(p_max_dbm)
}

/// Per-pair open-loop powers (watts). Each transmitter compensates the
/// coupling loss of its own Tx-to-Rx link, measured from the gain table as
/// `-10 log10(g)` so shadowing and antenna gains are folded in.
pub fn olpc_policy(gains: &GainTable, radio: &RadioConfig, params: &OlpcParams) -> Vec<f64> {
    gains
        .g_d2d_link
        .iter()
        .map(|&g| {
            let coupling_loss_db = -10.0 * g.log10();
            dbm_to_watt(olpc_power_dbm(coupling_loss_db, params, radio.p_max_dbm))
        })
        .collect()
}
