//! Fixed-size De Bruijn graph availability model.
//!
//! A DBG of state size `k` tracks the last `k` status bits (newest bit least
//! significant). Each state has two successors, `b2..bk0` and `b2..bk1`, and
//! the empirical transition counts define a Markov chain whose stationary mass
//! on online-ending states is the node's stationary online probability.

use serde::{Deserialize, Serialize};

use super::stationary::{absorption_probabilities, solve_stationary_sparse, strongly_connected};

/// Upper bound on state size; histories are kept in a 64-bit register.
pub const HARD_MAX_STATE_SIZE: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dbg {
    state_size: usize,
    /// Recent status bits, newest at bit 0.
    history: u64,
    consumed: u64,
    ones: u64,
    visits: Vec<f64>,
    transitions: Vec<[f64; 2]>,
    sop: f64,
    /// Last stationary solution over all states, used as a warm start.
    #[serde(skip)]
    pi: Vec<f64>,
}

impl Dbg {
    pub fn new(state_size: usize) -> Self {
        assert!(
            (1..=HARD_MAX_STATE_SIZE).contains(&state_size),
            "state size {state_size} out of range"
        );
        let states = 1usize << state_size;
        Dbg {
            state_size,
            history: 0,
            consumed: 0,
            ones: 0,
            visits: vec![0.0; states],
            transitions: vec![[0.0; 2]; states],
            sop: 0.0,
            pi: Vec::new(),
        }
    }

    pub fn state_size(&self) -> usize {
        self.state_size
    }

    pub fn state_count(&self) -> usize {
        1 << self.state_size
    }

    fn mask(&self) -> u64 {
        (1u64 << self.state_size) - 1
    }

    /// The last `state_size` bits, once that many have been seen.
    pub fn current_state(&self) -> Option<usize> {
        (self.consumed >= self.state_size as u64).then(|| (self.history & self.mask()) as usize)
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn visit_count(&self, state: usize) -> f64 {
        self.visits[state]
    }

    pub fn transition_count(&self, state: usize, bit: u8) -> f64 {
        self.transitions[state][bit as usize]
    }

    /// `p^bit` for `state`, or `None` when no transition was recorded from it.
    pub fn transition_probability(&self, state: usize, bit: u8) -> Option<f64> {
        let [c0, c1] = self.transitions[state];
        let total = c0 + c1;
        (total > 0.0).then(|| if bit == 0 { c0 / total } else { c1 / total })
    }

    pub fn successor(&self, state: usize, bit: u8) -> usize {
        ((state << 1) | bit as usize) & self.mask() as usize
    }

    /// Fraction of online bits among the last `window` statuses seen.
    pub fn recent_online_fraction(&self, window: usize) -> f64 {
        let w = (window as u64).min(self.consumed).min(64) as u32;
        if w == 0 {
            return 0.0;
        }
        let bits = if w == 64 { self.history } else { self.history & ((1u64 << w) - 1) };
        bits.count_ones() as f64 / w as f64
    }

    fn warm_up_fraction(&self) -> f64 {
        if self.consumed == 0 {
            0.0
        } else {
            self.ones as f64 / self.consumed as f64
        }
    }

    /// Consumes one status bit and returns the updated online probability.
    pub fn update(&mut self, online: bool) -> f64 {
        let bit = online as usize;
        if let Some(cur) = self.current_state() {
            self.transitions[cur][bit] += 1.0;
        }
        self.history = (self.history << 1) | bit as u64;
        self.consumed += 1;
        self.ones += bit as u64;
        if let Some(cur) = self.current_state() {
            self.visits[cur] += 1.0;
        }
        self.refresh();
        self.sop
    }

    /// Stationary online probability as of the last update.
    pub fn sop(&self) -> f64 {
        self.sop
    }

    /// Stationary online probability of the chain as seen from the current
    /// state.
    ///
    /// Before any transition is recorded this is the online fraction seen so
    /// far. Otherwise the chain is restricted to states reachable from the
    /// current one; a state with no recorded outgoing transition is absorbing.
    /// A closed class made only of online-ending (offline-ending) states yields
    /// 1 (0); a mixed class is solved for its stationary distribution. With
    /// several reachable closed classes their results are weighted by the
    /// absorption probabilities from the current state.
    fn refresh(&mut self) {
        self.sop = self.compute_sop().clamp(0.0, 1.0);
    }

    fn compute_sop(&mut self) -> f64 {
        let Some(start) = self.current_state() else {
            return self.warm_up_fraction();
        };
        if self.transitions.iter().all(|[a, b]| a + b == 0.0) {
            return self.warm_up_fraction();
        }

        // States reachable from `start`, with local indices.
        let mut local = vec![usize::MAX; self.state_count()];
        let mut states = vec![start];
        local[start] = 0;
        let mut i = 0;
        while i < states.len() {
            let s = states[i];
            for bit in 0..2u8 {
                if self.transitions[s][bit as usize] > 0.0 {
                    let next = self.successor(s, bit);
                    if local[next] == usize::MAX {
                        local[next] = states.len();
                        states.push(next);
                    }
                }
            }
            i += 1;
        }

        let n = states.len();
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
        for &s in &states {
            let total = self.transitions[s][0] + self.transitions[s][1];
            let mut row = Vec::with_capacity(2);
            if total == 0.0 {
                row.push((local[s], 1.0));
            } else {
                for bit in 0..2u8 {
                    let w = self.transitions[s][bit as usize];
                    if w > 0.0 {
                        row.push((local[self.successor(s, bit)], w / total));
                    }
                }
            }
            rows.push(row);
        }
        let adj: Vec<Vec<usize>> = rows.iter().map(|r| r.iter().map(|&(j, _)| j).collect()).collect();

        let comps = strongly_connected(&adj);
        let mut comp_of = vec![0usize; n];
        for (c, members) in comps.iter().enumerate() {
            for &m in members {
                comp_of[m] = c;
            }
        }
        let closed: Vec<&Vec<usize>> = comps
            .iter()
            .enumerate()
            .filter(|(c, members)| members.iter().all(|&m| adj[m].iter().all(|&t| comp_of[t] == *c)))
            .map(|(_, members)| members)
            .collect();

        if self.pi.len() != self.state_count() {
            self.pi = vec![0.0; self.state_count()];
        }
        let mut class_sop = |members: &[usize]| -> f64 {
            let online_ending = |m: usize| states[m] & 1 == 1;
            if members.iter().all(|&m| online_ending(m)) {
                return 1.0;
            }
            if members.iter().all(|&m| !online_ending(m)) {
                return 0.0;
            }
            let mut pos = vec![usize::MAX; n];
            for (a, &m) in members.iter().enumerate() {
                pos[m] = a;
            }
            let sub: Vec<Vec<(usize, f64)>> = members
                .iter()
                .map(|&m| rows[m].iter().map(|&(j, w)| (pos[j], w)).collect())
                .collect();
            let warm: Vec<f64> = members.iter().map(|&m| self.pi[states[m]]).collect();
            match solve_stationary_sparse(&sub, Some(&warm)) {
                Ok(pi) => {
                    for (&m, &x) in members.iter().zip(&pi) {
                        self.pi[states[m]] = x;
                    }
                    members
                        .iter()
                        .zip(pi)
                        .filter(|(&m, _)| online_ending(m))
                        .map(|(_, x)| x)
                        .sum()
                }
                Err(_) => f64::NAN,
            }
        };

        let value = if closed.len() == 1 {
            class_sop(closed[0])
        } else {
            let mut dense = vec![vec![0.0; n]; n];
            for (i, row) in rows.iter().enumerate() {
                for &(j, w) in row {
                    dense[i][j] += w;
                }
            }
            let classes: Vec<Vec<usize>> = closed.iter().map(|c| c.to_vec()).collect();
            match absorption_probabilities(&dense, &classes, 0) {
                Ok(weights) => classes
                    .iter()
                    .zip(weights)
                    .filter(|(_, w)| *w > 0.0)
                    .map(|(c, w)| w * class_sop(c))
                    .sum(),
                Err(_) => f64::NAN,
            }
        };
        if value.is_nan() {
            self.warm_up_fraction()
        } else {
            value
        }
    }

    /// DBG of size k+1: each state `s` maps to `s0` and `s1`, both inheriting
    /// the parent's transition counts. Visit counts are split, the odd unit
    /// going to the `...0` child. Returns `None` beyond `max_state_size`.
    pub fn enlarge(&self, max_state_size: usize) -> Option<Dbg> {
        let k = self.state_size + 1;
        if k > max_state_size.min(HARD_MAX_STATE_SIZE) {
            return None;
        }
        let mut out = Dbg::new(k);
        out.history = self.history;
        out.consumed = self.consumed;
        out.ones = self.ones;
        for s in 0..self.state_count() {
            let (c0, c1) = (s << 1, (s << 1) | 1);
            out.transitions[c0] = self.transitions[s];
            out.transitions[c1] = self.transitions[s];
            let half = (self.visits[s] / 2.0).floor();
            out.visits[c1] = half;
            out.visits[c0] = self.visits[s] - half;
            if let Some(&p) = self.pi.get(s) {
                out.pi.resize(out.state_count(), 0.0);
                out.pi[c0] = p / 2.0;
                out.pi[c1] = p / 2.0;
            }
        }
        out.refresh();
        Some(out)
    }

    /// DBG of size k-1: `s0` and `s1` merge into `s`, whose transition
    /// probabilities are the mean of the sources' (sources without recorded
    /// transitions are skipped). Transition and visit mass are preserved.
    /// Returns `None` at state size 1.
    pub fn shrink(&self) -> Option<Dbg> {
        if self.state_size < 2 {
            return None;
        }
        let mut out = Dbg::new(self.state_size - 1);
        out.history = self.history;
        out.consumed = self.consumed;
        out.ones = self.ones;
        for m in 0..out.state_count() {
            let sources = [m << 1, (m << 1) | 1];
            let mut mass = 0.0;
            let mut p1_sum = 0.0;
            let mut with_data = 0;
            for &s in &sources {
                let total = self.transitions[s][0] + self.transitions[s][1];
                mass += total;
                if total > 0.0 {
                    p1_sum += self.transitions[s][1] / total;
                    with_data += 1;
                }
                out.visits[m] += self.visits[s];
            }
            if with_data > 0 {
                let p1 = p1_sum / with_data as f64;
                out.transitions[m] = [mass * (1.0 - p1), mass * p1];
            }
        }
        out.refresh();
        Some(out)
    }

    /// Checks `p^0 + p^1 = 1` for every state with recorded transitions.
    pub fn probabilities_normalized(&self, tol: f64) -> bool {
        (0..self.state_count()).all(|s| match (self.transition_probability(s, 0), self.transition_probability(s, 1)) {
            (Some(a), Some(b)) => (a + b - 1.0).abs() <= tol,
            _ => true,
        })
    }
}
