//! Sliding window of three consecutive-size DBGs.

use serde::{Deserialize, Serialize};

use super::dbg::Dbg;
use super::PredErrorMode;

pub const DEFAULT_MAX_STATE_SIZE: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateWindow {
    pub left: Dbg,
    pub center: Dbg,
    pub right: Dbg,
    pub last_sop: f64,
    max_state_size: usize,
    mode: PredErrorMode,
}

impl Default for StateWindow {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_STATE_SIZE, PredErrorMode::Window)
    }
}

impl StateWindow {
    /// Window starting at sizes (1, 2, 3). `max_state_size` caps the right DBG.
    pub fn new(max_state_size: usize, mode: PredErrorMode) -> Self {
        let max_state_size = max_state_size.max(3);
        StateWindow {
            left: Dbg::new(1),
            center: Dbg::new(2),
            right: Dbg::new(3),
            last_sop: 0.0,
            max_state_size,
            mode,
        }
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.left.state_size(), self.center.state_size(), self.right.state_size())
    }

    fn error(&self, dbg: &Dbg, sop: f64, status: bool) -> f64 {
        match self.mode {
            PredErrorMode::Window => (sop - dbg.recent_online_fraction(dbg.state_size())).abs(),
            PredErrorMode::Instant => (sop - f64::from(u8::from(status))).abs(),
        }
    }

    /// Feeds one status bit, slides the window towards the better-predicting
    /// side and returns the sop of the DBG with the smallest error.
    pub fn update(&mut self, online: bool) -> f64 {
        let mut sops = [
            self.left.update(online),
            self.center.update(online),
            self.right.update(online),
        ];
        let mut errs = [
            self.error(&self.left, sops[0], online),
            self.error(&self.center, sops[1], online),
            self.error(&self.right, sops[2], online),
        ];

        while errs[0] > errs[1] && errs[1] > errs[2] {
            let Some(next) = self.right.enlarge(self.max_state_size) else {
                log::trace!("enlarge refused at state size {}", self.right.state_size());
                break;
            };
            let sop = next.sop();
            let err = self.error(&next, sop, online);
            self.left = std::mem::replace(&mut self.center, std::mem::replace(&mut self.right, next));
            sops = [sops[1], sops[2], sop];
            errs = [errs[1], errs[2], err];
        }

        while errs[0] < errs[1] && errs[1] < errs[2] {
            let Some(next) = self.left.shrink() else { break };
            let sop = next.sop();
            let err = self.error(&next, sop, online);
            self.right = std::mem::replace(&mut self.center, std::mem::replace(&mut self.left, next));
            sops = [sop, sops[0], sops[1]];
            errs = [err, errs[0], errs[1]];
        }

        let mut best = 1;
        for i in [0, 2] {
            if errs[i] < errs[best] {
                best = i;
            }
        }
        self.last_sop = sops[best];
        self.last_sop
    }
}
