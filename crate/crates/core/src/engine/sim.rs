use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{RejoinMode, SimConfig};
use super::metrics::{PredictorError, RunMetrics, SlotMetrics};
use crate::churn::{draw_arrival_count, draw_session_length, uniform_churn_online, ChurnKind};
use crate::error::Result;
use crate::overlay::{
    generate_topology, join_node, route_step, splice, Direction, LevelIndex, LookupTable, NodeAddr, NodeIdentity,
    PiggybackEntry, RouteDecision, SearchMessage, TopologySnapshot,
};
use crate::predictors::{prediction_error, Predictor, PredictorKind, SlotContext};
use crate::stabilizers::{Contact, ResolveEnv, Stabilizer};

/// Round trip time between two nodes from their synthetic coordinates.
pub fn rtt(config: &SimConfig, a: &NodeIdentity, b: &NodeIdentity) -> f64 {
    let (dx, dy) = (a.coords.0 - b.coords.0, a.coords.1 - b.coords.1);
    config.rtt_base_ms + config.rtt_per_unit_distance_ms * dx.hypot(dy)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResolveRecord {
    pub node: u64,
    pub level: usize,
    pub direction: Direction,
    pub contacts: Vec<Contact>,
    pub result: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchOutcome {
    pub success: bool,
    pub result: NodeAddr,
    pub latency_ms: f64,
    pub hops: u32,
    pub resolve_invocations: u32,
    pub resolve_messages: u32,
    /// numIds of the nodes the message visited, initiator first.
    pub path: Vec<u64>,
    pub resolves: Vec<ResolveRecord>,
}

const TOPOLOGY_STREAM: u64 = 0;
const CHURN_STREAM: u64 = 1;
const WORKLOAD_STREAM: u64 = 2;

fn stream(seed: u64, topology_index: u32, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(topology_index) * 4 + purpose);
    rng
}

/// One topology under churn: all per-node state plus the random streams.
pub struct TopologyRun {
    config: SimConfig,
    topology_index: u32,
    topology: TopologySnapshot,
    index: LevelIndex,
    online: Vec<bool>,
    arrived: Vec<bool>,
    session_left: Vec<u32>,
    /// Last slot each node fed its predictors.
    last_update: Vec<Option<u64>>,
    incoming: Vec<u64>,
    lookups: Vec<LookupTable>,
    stabilizers: Vec<Stabilizer>,
    /// Primary predictor first, then the shadows.
    predictors: Vec<Vec<Predictor>>,
    kinds: Vec<PredictorKind>,
    error_sums: Vec<f64>,
    error_samples: Vec<u64>,
    churn_rng: ChaCha8Rng,
    workload_rng: ChaCha8Rng,
    trace: Vec<String>,
}

impl TopologyRun {
    pub fn new(config: &SimConfig, topology_index: u32) -> Result<Self> {
        config.validate()?;
        let topo_seed = stream(config.seed, topology_index, TOPOLOGY_STREAM).next_u64();
        let topology = generate_topology(config.capacity, topo_seed)?;
        Self::with_topology(config, topology, topology_index)
    }

    pub fn with_topology(config: &SimConfig, topology: TopologySnapshot, topology_index: u32) -> Result<Self> {
        config.validate()?;
        let n = topology.len();
        let levels = topology.levels();
        let mut kinds = vec![config.predictor];
        kinds.extend(config.shadow_predictors.iter().copied().filter(|k| *k != config.predictor));
        let fresh_predictors: Vec<Predictor> = kinds
            .iter()
            .map(|&k| Predictor::new(k, config.max_state_size, config.pred_error))
            .collect();
        Ok(TopologyRun {
            config: config.clone(),
            topology_index,
            index: LevelIndex::new(&topology),
            online: vec![false; n],
            arrived: vec![false; n],
            session_left: vec![0; n],
            last_update: vec![None; n],
            incoming: vec![0; n],
            lookups: vec![LookupTable::empty(levels); n],
            stabilizers: vec![Stabilizer::None; n],
            predictors: vec![fresh_predictors; n],
            error_sums: vec![0.0; kinds.len()],
            error_samples: vec![0; kinds.len()],
            kinds,
            churn_rng: stream(config.seed, topology_index, CHURN_STREAM),
            workload_rng: stream(config.seed, topology_index, WORKLOAD_STREAM),
            topology,
            trace: Vec::new(),
        })
    }

    pub fn topology(&self) -> &TopologySnapshot {
        &self.topology
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn is_online(&self, node: NodeAddr) -> bool {
        self.online[node.index()]
    }

    pub fn lookup(&self, node: NodeAddr) -> &LookupTable {
        &self.lookups[node.index()]
    }

    pub fn stabilizer(&self, node: NodeAddr) -> &Stabilizer {
        &self.stabilizers[node.index()]
    }

    pub fn predictor(&self, node: NodeAddr) -> &Predictor {
        &self.predictors[node.index()][0]
    }

    pub fn online_nodes(&self) -> Vec<NodeAddr> {
        (0..self.online.len())
            .filter(|&i| self.online[i])
            .map(|i| NodeAddr(i as u32))
            .collect()
    }

    /// Takes `node` offline without notifying anyone.
    pub fn depart(&mut self, node: NodeAddr) {
        self.online[node.index()] = false;
    }

    /// Sorted numIds of the online nodes.
    pub fn online_sorted_ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self.online_nodes().iter().map(|a| self.topology.node(*a).num_id).collect();
        ids.sort_unstable();
        ids
    }

    fn ctx(&self, node: usize, slot: u64) -> SlotContext {
        SlotContext {
            slot,
            incoming_total: self.incoming[node],
            capacity: self.topology.capacity as u64,
        }
    }

    /// Feeds status 0 for every slot before `slot` the node has not reported.
    fn catch_up(&mut self, i: usize, slot: u64) {
        if !self.arrived[i] {
            return;
        }
        let from = self.last_update[i].map_or(0, |s| s + 1);
        for s in from..slot {
            let ctx = self.ctx(i, s);
            for p in &mut self.predictors[i] {
                p.update(false, ctx);
            }
            self.last_update[i] = Some(s);
        }
    }

    /// Brings `node` online at `slot`: predictor catch-up for the slots it
    /// missed, then a join.
    fn arrive(&mut self, node: NodeAddr, slot: u64) {
        let i = node.index();
        self.catch_up(i, slot);
        self.online[i] = true;
        let rejoin_stale = self.arrived[i] && self.config.rejoin == RejoinMode::Stale;
        if !rejoin_stale {
            self.lookups[i] = join_node(&self.topology, node, &self.online);
            splice(&mut self.lookups, &self.topology, node);
            self.stabilizers[i] = Stabilizer::new(
                self.config.stabilizer,
                self.config.backup_size,
                node,
                &self.topology,
                &self.index,
                &self.online,
            );
        }
        self.arrived[i] = true;
    }

    fn churn_step(&mut self, slot: u64) {
        match self.config.churn.kind {
            ChurnKind::Debian => {
                let pool: Vec<NodeAddr> = (0..self.online.len())
                    .filter(|&i| !self.online[i])
                    .map(|i| NodeAddr(i as u32))
                    .collect();
                let wanted = draw_arrival_count(&self.config.churn, &mut self.churn_rng);
                let count = (wanted as usize).min(pool.len());
                let picks = sample(&mut self.churn_rng, pool.len(), count);
                for k in picks.iter() {
                    let node = pool[k];
                    self.session_left[node.index()] = draw_session_length(&self.config.churn, &mut self.churn_rng);
                    self.arrive(node, slot);
                }
            }
            ChurnKind::Uniform { q } => {
                let status: Vec<bool> = (0..self.online.len())
                    .map(|_| uniform_churn_online(q, &mut self.churn_rng))
                    .collect();
                for (i, &up) in status.iter().enumerate() {
                    if !up {
                        self.online[i] = false;
                    }
                }
                for (i, &up) in status.iter().enumerate() {
                    if up && !self.online[i] {
                        self.arrive(NodeAddr(i as u32), slot);
                    }
                }
            }
        }
    }

    /// One time slot: arrivals, the search workload, predictor updates,
    /// error sampling and departures.
    pub fn run_slot(&mut self, slot: u32) -> SlotMetrics {
        let slot64 = u64::from(slot);
        self.churn_step(slot64);

        let online = self.online_nodes();
        let mut m = SlotMetrics {
            slot_index: slot,
            online_count: online.len() as u64,
            ..SlotMetrics::default()
        };

        // Each node's latest prediction, made before this slot's status was
        // known, against that status.
        for i in 0..self.online.len() {
            for (k, p) in self.predictors[i].iter().enumerate() {
                let err = prediction_error(p.current(), self.online[i]);
                self.error_sums[k] += err;
                self.error_samples[k] += 1;
                if k == 0 {
                    m.sum_prediction_error += err;
                    m.prediction_samples += 1;
                }
            }
        }

        let n_o = online.len() as u64;
        let mut max_searches = n_o * n_o.saturating_sub(1) / 2;
        if let Some(cap) = self.config.search_cap {
            max_searches = max_searches.min(cap);
        }
        let searches = self.workload_rng.random_range(0..=max_searches);
        for _ in 0..searches {
            let initiator = online[self.workload_rng.random_range(0..online.len())];
            let target = online[self.workload_rng.random_range(0..online.len())];
            let target_id = self.topology.node(target).num_id;
            let out = self.run_search(initiator, target_id);
            m.searches_initiated += 1;
            m.searches_succeeded += u64::from(out.success);
            m.sum_latency_ms += out.latency_ms;
            m.sum_hops += u64::from(out.hops);
            m.resolve_invocations += u64::from(out.resolve_invocations);
            m.resolve_messages += u64::from(out.resolve_messages);
            if self.config.trace {
                self.record_trace(slot, initiator, target_id, &out);
            }
        }

        let levels = self.topology.levels() as f64;
        for &node in &online {
            let i = node.index();
            let ctx = self.ctx(i, slot64);
            for p in &mut self.predictors[i] {
                p.update(true, ctx);
            }
            self.last_update[i] = Some(slot64);
            m.sum_backup_per_level += self.stabilizers[i].entry_count() as f64 / levels;
            m.backup_samples += 1;
            if let Some(size) = self.predictors[i][0].right_state_size() {
                m.sum_right_state_size += size as f64;
                m.right_state_samples += 1;
            }
        }

        for i in 0..self.online.len() {
            if !self.online[i] {
                self.catch_up(i, slot64 + 1);
            }
        }

        if self.config.churn.kind == ChurnKind::Debian {
            for &node in &online {
                let i = node.index();
                self.session_left[i] = self.session_left[i].saturating_sub(1);
                if self.session_left[i] == 0 {
                    self.online[i] = false;
                }
            }
        }
        m
    }

    fn record_trace(&mut self, slot: u32, initiator: NodeAddr, target: u64, out: &SearchOutcome) {
        let line = serde_json::json!({
            "topology": self.topology_index,
            "slot": slot,
            "initiator": self.topology.node(initiator).num_id,
            "target": target,
            "result": self.topology.node(out.result).num_id,
            "success": out.success,
            "hops": out.path,
            "resolves": out.resolves,
            "latencyMs": out.latency_ms,
        });
        self.trace.push(line.to_string());
    }

    fn entry_of(&self, node: NodeAddr) -> PiggybackEntry {
        let id = self.topology.node(node);
        PiggybackEntry {
            address: node,
            num_id: id.num_id,
            name_id: id.name_id,
            sop: self.predictors[node.index()][0].current().clamp(0.0, 1.0),
        }
    }

    /// Moves the message from `from` to the online node `to`.
    fn deliver(&mut self, msg: &mut SearchMessage, from: NodeAddr, to: NodeAddr) {
        let entry = self.entry_of(from);
        msg.piggyback(entry);
        msg.hops += 1;
        let t = to.index();
        self.incoming[t] += 1;
        let owner = self.topology.node(to);
        self.stabilizers[t].on_message(owner, &self.lookups[t], &msg.piggyback);
    }

    /// Routes one search from `initiator` towards `target`, paying round trips
    /// and timeouts and invoking the stabilizer on every timeout.
    pub fn run_search(&mut self, initiator: NodeAddr, target: u64) -> SearchOutcome {
        let levels = self.topology.levels();
        let mut msg = SearchMessage::new(self.topology.node(initiator), target, levels - 1);
        let mut out = SearchOutcome {
            success: false,
            result: initiator,
            latency_ms: 0.0,
            hops: 0,
            resolve_invocations: 0,
            resolve_messages: 0,
            path: vec![self.topology.node(initiator).num_id],
            resolves: Vec::new(),
        };
        let timeout = self.config.timeout_multiplier;
        let mut cur = initiator;
        // Every step either moves strictly towards the target or lowers the level.
        let step_limit = 2 * (self.topology.len() + levels) + 8;
        let mut steps = 0;
        let result = loop {
            steps += 1;
            if steps > step_limit {
                log::warn!("search for {target} from {} exceeded {step_limit} steps", initiator.0);
                break cur;
            }
            let node = *self.topology.node(cur);
            msg.direction = Direction::towards(node.num_id, target);
            match route_step(&node, &self.lookups[cur.index()], &msg) {
                RouteDecision::Terminate { result } => break result,
                RouteDecision::Descend { level } => msg.level = level,
                RouteDecision::Forward { to, .. } => {
                    let rt = rtt(&self.config, &node, self.topology.node(to));
                    if self.online[to.index()] {
                        msg.accumulated_latency_ms += rt;
                        self.deliver(&mut msg, cur, to);
                        out.path.push(self.topology.node(to).num_id);
                        cur = to;
                        continue;
                    }
                    msg.accumulated_latency_ms += timeout * rt;
                    let env = ResolveEnv {
                        topology: &self.topology,
                        index: &self.index,
                        online: &self.online,
                    };
                    let resolved = self.stabilizers[cur.index()].resolve(&node, msg.level, msg.direction, &msg, &env);
                    out.resolve_invocations += 1;
                    out.resolve_messages += resolved.trace.len() as u32;
                    for c in &resolved.trace {
                        let rt = rtt(&self.config, &node, self.topology.node(c.address));
                        msg.accumulated_latency_ms += if c.online { rt } else { timeout * rt };
                    }
                    if self.config.trace {
                        out.resolves.push(ResolveRecord {
                            node: node.num_id,
                            level: msg.level,
                            direction: msg.direction,
                            contacts: resolved.trace.clone(),
                            result: resolved.result.map(|a| self.topology.node(a).num_id),
                        });
                    }
                    match resolved.result {
                        Some(next) => {
                            self.deliver(&mut msg, cur, next);
                            out.path.push(self.topology.node(next).num_id);
                            cur = next;
                        }
                        None if msg.level > 0 => msg.level -= 1,
                        None => break cur,
                    }
                }
            }
        };
        out.result = result;
        out.success = self.topology.node(result).num_id == target && self.online[result.index()];
        out.latency_ms = msg.accumulated_latency_ms;
        out.hops = msg.hops;
        out
    }

    fn finish(self, slots: Vec<SlotMetrics>) -> RunMetrics {
        let errors = self
            .kinds
            .iter()
            .enumerate()
            .map(|(k, &kind)| PredictorError {
                predictor: kind,
                sum_error: self.error_sums[k],
                samples: self.error_samples[k],
                mean_error: 0.0,
                std_dev: 0.0,
            })
            .collect();
        RunMetrics::from_slots(slots, errors, self.trace)
    }

    /// Runs every configured slot and returns the metrics.
    pub fn run(mut self) -> RunMetrics {
        let slots = (0..self.config.slots).map(|s| self.run_slot(s)).collect();
        self.finish(slots)
    }
}

pub fn run_topology(config: &SimConfig, topology_index: u32) -> Result<RunMetrics> {
    Ok(TopologyRun::new(config, topology_index)?.run())
}

/// All topologies of `config`, in parallel, aggregated in index order.
pub fn run_all(config: &SimConfig) -> Result<RunMetrics> {
    use rayon::prelude::*;
    config.validate()?;
    let runs = (0..config.topologies)
        .into_par_iter()
        .map(|t| run_topology(config, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(super::metrics::aggregate(&runs))
}
