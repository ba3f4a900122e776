use serde::{Deserialize, Serialize};

use super::lookup::LookupTable;
use super::name_id::NameId;
use super::topology::{NodeAddr, NodeIdentity};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn index(self) -> usize {
        match self {
            Direction::Left => 0,
            Direction::Right => 1,
        }
    }

    /// Direction a search from `from` must travel to reach `target`.
    pub fn towards(from: u64, target: u64) -> Direction {
        if target < from {
            Direction::Left
        } else {
            Direction::Right
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PiggybackEntry {
    pub address: NodeAddr,
    pub num_id: u64,
    pub name_id: NameId,
    pub sop: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchMessage {
    pub target_num_id: u64,
    pub level: usize,
    pub direction: Direction,
    pub piggyback: Vec<PiggybackEntry>,
    pub initiator: NodeAddr,
    pub accumulated_latency_ms: f64,
    pub hops: u32,
}

impl SearchMessage {
    pub fn new(initiator: &NodeIdentity, target: u64, top_level: usize) -> Self {
        SearchMessage {
            target_num_id: target,
            level: top_level,
            direction: Direction::towards(initiator.num_id, target),
            piggyback: Vec::new(),
            initiator: initiator.address,
            accumulated_latency_ms: 0.0,
            hops: 0,
        }
    }

    /// Appends an entry; an older entry for the same node is replaced.
    pub fn piggyback(&mut self, entry: PiggybackEntry) {
        self.piggyback.retain(|e| e.num_id != entry.num_id);
        self.piggyback.push(entry);
    }

    pub fn visited(&self, num_id: u64) -> bool {
        self.piggyback.iter().any(|e| e.num_id == num_id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RouteDecision {
    Forward { to: NodeAddr, level: usize },
    Descend { level: usize },
    /// The search ends here; `result` is the address reported to the initiator.
    Terminate { result: NodeAddr },
}

/// One step of search-for-numerical-ID at `node`.
///
/// On a left-bound search that bottoms out above the target, the result is the
/// level-0 left neighbor (greatest ID not above the target) when one exists;
/// the message itself is never forwarded past the target.
pub fn route_step(node: &NodeIdentity, lookup: &LookupTable, msg: &SearchMessage) -> RouteDecision {
    let target = msg.target_num_id;
    if node.num_id == target {
        return RouteDecision::Terminate { result: node.address };
    }
    let level = msg.level;
    if let Some(n) = lookup.neighbor(level, msg.direction) {
        let eligible = match msg.direction {
            Direction::Right => n.num_id > node.num_id && n.num_id <= target,
            Direction::Left => n.num_id < node.num_id && n.num_id >= target,
        };
        if eligible {
            return RouteDecision::Forward { to: n.address, level };
        }
    }
    if level > 0 {
        return RouteDecision::Descend { level: level - 1 };
    }
    if msg.direction == Direction::Left && node.num_id > target {
        if let Some(pred) = lookup.neighbor(0, Direction::Left) {
            return RouteDecision::Terminate { result: pred.address };
        }
    }
    RouteDecision::Terminate { result: node.address }
}

/// Ground truth for a search: the greatest online ID not above `target`, or the
/// smallest online ID when every ID exceeds it.
pub fn ideal_search_oracle(online_sorted: &[u64], target: u64) -> Result<u64> {
    let first = *online_sorted.first().ok_or(Error::NoOnlineNodes)?;
    let idx = online_sorted.partition_point(|&x| x <= target);
    Ok(if idx == 0 { first } else { online_sorted[idx - 1] })
}
