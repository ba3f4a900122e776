//! Lifetime and LUDP availability predictors.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifetimeState {
    pub online_slots: u64,
    pub elapsed_slots: u64,
}

pub fn lifetime_predict(state: &LifetimeState) -> f64 {
    if state.elapsed_slots == 0 {
        return 0.0;
    }
    state.online_slots as f64 / state.elapsed_slots as f64
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LudpState {
    /// Total online slots so far.
    pub age_slots: u64,
    pub incoming_connections: u64,
    pub current_slot: u64,
    pub capacity: u64,
}

pub fn ludp_predict(state: &LudpState) -> f64 {
    if state.current_slot == 0 || state.capacity == 0 {
        return 0.0;
    }
    let op = (state.age_slots as f64 * state.incoming_connections as f64)
        / (state.current_slot as f64 * state.capacity as f64);
    op.clamp(0.0, 1.0)
}
