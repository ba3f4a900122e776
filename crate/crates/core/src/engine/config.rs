use serde::{Deserialize, Serialize};

use crate::churn::ChurnModel;
use crate::error::{Error, Result};
use crate::predictors::{PredErrorMode, PredictorKind, DEFAULT_MAX_STATE_SIZE, HARD_MAX_STATE_SIZE};
use crate::stabilizers::StabilizerKind;

/// How a returning node re-enters the overlay.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RejoinMode {
    /// Join again from scratch with fresh tables.
    #[default]
    Fresh,
    /// Come back with the tables held at departure, unannounced.
    Stale,
}

impl std::str::FromStr for RejoinMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fresh" => Ok(RejoinMode::Fresh),
            "stale" => Ok(RejoinMode::Stale),
            _ => Err(Error::config("rejoin", format!("expected `fresh` or `stale`, got `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimConfig {
    pub capacity: usize,
    pub slots: u32,
    pub topologies: u32,
    pub backup_size: usize,
    pub stabilizer: StabilizerKind,
    pub predictor: PredictorKind,
    /// Extra predictors run side by side on the same trace, for error
    /// comparison only.
    pub shadow_predictors: Vec<PredictorKind>,
    pub timeout_multiplier: f64,
    pub rtt_base_ms: f64,
    pub rtt_per_unit_distance_ms: f64,
    /// Per-slot limit on the search count draw; `None` draws from the full range.
    pub search_cap: Option<u64>,
    pub seed: u64,
    pub rejoin: RejoinMode,
    pub pred_error: PredErrorMode,
    pub max_state_size: usize,
    pub churn: ChurnModel,
    /// Keep a per-search NDJSON trace in the results.
    pub trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            capacity: 1024,
            slots: 168,
            topologies: 100,
            backup_size: 40,
            stabilizer: StabilizerKind::Interlaced,
            predictor: PredictorKind::SwDbg,
            shadow_predictors: Vec::new(),
            timeout_multiplier: 2.0,
            rtt_base_ms: 20.0,
            rtt_per_unit_distance_ms: 180.0,
            search_cap: Some(2000),
            seed: 1,
            rejoin: RejoinMode::Fresh,
            pred_error: PredErrorMode::Window,
            max_state_size: DEFAULT_MAX_STATE_SIZE,
            churn: ChurnModel::default(),
            trace: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.capacity < 2 || !self.capacity.is_power_of_two() {
            return Err(Error::config("capacity", "capacity must be a power of two"));
        }
        if self.capacity > 1 << 20 {
            return Err(Error::config("capacity", "at most 2^20 nodes are supported"));
        }
        if self.slots == 0 {
            return Err(Error::config("slots", "must be at least 1"));
        }
        if self.topologies == 0 {
            return Err(Error::config("topologies", "must be at least 1"));
        }
        if !(self.timeout_multiplier.is_finite() && self.timeout_multiplier > 0.0) {
            return Err(Error::config("timeout-multiplier", "must be a positive number"));
        }
        if !(self.rtt_base_ms >= 0.0 && self.rtt_per_unit_distance_ms >= 0.0) {
            return Err(Error::config("rtt-base-ms", "round trip parameters must be non-negative"));
        }
        if !(3..=HARD_MAX_STATE_SIZE).contains(&self.max_state_size) {
            return Err(Error::config(
                "max-state-size",
                format!("must lie in [3, {HARD_MAX_STATE_SIZE}]"),
            ));
        }
        self.churn.validate()
    }

    pub fn levels(&self) -> usize {
        self.capacity.trailing_zeros() as usize
    }
}
