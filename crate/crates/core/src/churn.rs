//! Churn workload: Weibull session lengths, per-slot arrival counts and the
//! memoryless uniform model.

use rand::Rng;
use rand_distr::{Distribution, Poisson, Weibull};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SLOT_SECONDS: f64 = 3600.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ChurnKind {
    Debian,
    /// Every node is offline in a slot with probability `q`, independently.
    Uniform { q: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalProcess {
    #[default]
    Poisson,
    Deterministic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChurnModel {
    pub session_shape: f64,
    pub session_mean_hours: f64,
    pub interarrival_mean_seconds: f64,
    pub kind: ChurnKind,
    pub arrivals: ArrivalProcess,
}

impl Default for ChurnModel {
    fn default() -> Self {
        ChurnModel {
            session_shape: 0.59,
            session_mean_hours: 2.71,
            interarrival_mean_seconds: 39.86,
            kind: ChurnKind::Debian,
            arrivals: ArrivalProcess::Poisson,
        }
    }
}

impl ChurnModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.session_shape > 0.0 && self.session_shape.is_finite()) {
            return Err(Error::config("session-shape", "must be a positive number"));
        }
        if !(self.session_mean_hours > 0.0 && self.session_mean_hours.is_finite()) {
            return Err(Error::config("session-mean-hours", "must be a positive number"));
        }
        if self.interarrival_mean_seconds.is_nan() || self.interarrival_mean_seconds <= 0.0 {
            return Err(Error::config("interarrival-mean-seconds", "must be positive"));
        }
        if let ChurnKind::Uniform { q } = self.kind {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::config("uniform-q", "must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Weibull scale that makes the configured mean exact.
    pub fn weibull_scale(&self) -> f64 {
        self.session_mean_hours / libm::tgamma(1.0 + 1.0 / self.session_shape)
    }

    /// Mean number of arrivals per slot.
    pub fn arrival_rate(&self) -> f64 {
        if self.interarrival_mean_seconds.is_infinite() {
            0.0
        } else {
            SLOT_SECONDS / self.interarrival_mean_seconds
        }
    }

    fn weibull(&self) -> Weibull<f64> {
        Weibull::new(self.weibull_scale(), self.session_shape).expect("validated Weibull parameters")
    }
}

/// Session length in hours, before slotting.
pub fn draw_session_hours<R: Rng + ?Sized>(model: &ChurnModel, rng: &mut R) -> f64 {
    model.weibull().sample(rng)
}

/// Session length in whole slots (at least one).
pub fn draw_session_length<R: Rng + ?Sized>(model: &ChurnModel, rng: &mut R) -> u32 {
    let slots = (draw_session_hours(model, rng) * 3600.0 / SLOT_SECONDS).ceil();
    slots.clamp(1.0, u32::MAX as f64) as u32
}

pub fn draw_arrival_count<R: Rng + ?Sized>(model: &ChurnModel, rng: &mut R) -> u64 {
    let rate = model.arrival_rate();
    if rate <= 0.0 {
        return 0;
    }
    match model.arrivals {
        ArrivalProcess::Poisson => Poisson::new(rate).expect("positive rate").sample(rng) as u64,
        ArrivalProcess::Deterministic => rate.round() as u64,
    }
}

pub fn uniform_churn_online<R: Rng + ?Sized>(q: f64, rng: &mut R) -> bool {
    rng.random_bool((1.0 - q).clamp(0.0, 1.0))
}
