//! Kademlia-style buckets on the Skip Graph: one recency-ordered list per
//! level and direction, with the backup budget split across levels.

use std::collections::VecDeque;

use super::{cand_check, placement, Contact, ResolveOutcome};
use crate::overlay::{Direction, LookupTable, Neighbor, NodeAddr, NodeIdentity, PiggybackEntry, SearchMessage};

/// Per-level `[left, right]` capacities for a total budget `b` over `levels`.
///
/// Each level gets `b / levels`, split between directions with the odd slot on
/// the left. The remainder is handed out bottom-up, one slot per direction.
pub fn kademlia_capacity(b: usize, levels: usize) -> Vec<[usize; 2]> {
    assert!(levels >= 1);
    let base = b / levels;
    let mut caps: Vec<[usize; 2]> = (0..levels).map(|_| [base - base / 2, base / 2]).collect();
    let mut rest = b % levels;
    let mut level = 0;
    while rest > 0 {
        caps[level][0] += 1;
        rest -= 1;
        if rest > 0 {
            caps[level][1] += 1;
            rest -= 1;
        }
        level += 1;
    }
    caps
}

#[derive(Clone, Debug, PartialEq)]
pub struct KademliaBuckets {
    /// Head (index 0) is the most recently inserted.
    buckets: Vec<[VecDeque<Neighbor>; 2]>,
    caps: Vec<[usize; 2]>,
}

impl KademliaBuckets {
    pub fn new(levels: usize, b: usize) -> Self {
        KademliaBuckets {
            buckets: vec![[VecDeque::new(), VecDeque::new()]; levels],
            caps: kademlia_capacity(b, levels),
        }
    }

    pub fn bucket(&self, level: usize, dir: Direction) -> &VecDeque<Neighbor> {
        &self.buckets[level][dir.index()]
    }

    pub fn capacity(&self, level: usize, dir: Direction) -> usize {
        self.caps[level][dir.index()]
    }

    pub fn len(&self) -> usize {
        self.buckets.iter().flatten().map(VecDeque::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn kademlia_update(
    buckets: &mut KademliaBuckets,
    owner: &NodeIdentity,
    lookup: &LookupTable,
    piggyback: &[PiggybackEntry],
) {
    let levels = buckets.buckets.len();
    for e in piggyback {
        if e.num_id == owner.num_id || lookup.is_neighbor(e.num_id) {
            continue;
        }
        let (level, dir) = placement(owner, e.num_id, e.name_id, levels);
        let cap = buckets.caps[level][dir.index()];
        let list = &mut buckets.buckets[level][dir.index()];
        if let Some(i) = list.iter().position(|n| n.num_id == e.num_id) {
            list.remove(i);
        }
        if cap == 0 {
            continue;
        }
        list.push_front(Neighbor {
            address: e.address,
            num_id: e.num_id,
            name_id: e.name_id,
        });
        list.truncate(cap);
    }
}

/// Pings eligible bucket members from the head; offline ones are removed.
pub fn kademlia_resolve(
    buckets: &mut KademliaBuckets,
    level: usize,
    direction: Direction,
    msg: &SearchMessage,
    mut online: impl FnMut(NodeAddr) -> bool,
) -> ResolveOutcome {
    let target = msg.target_num_id;
    let mut out = ResolveOutcome::default();
    if level >= buckets.buckets.len() {
        return out;
    }
    let list = &mut buckets.buckets[level][direction.index()];
    let mut order: Vec<Neighbor> = list
        .iter()
        .filter(|n| cand_check(n.num_id, target, direction, msg))
        .copied()
        .collect();
    if let Some(i) = order.iter().position(|n| n.num_id == target) {
        let hit = order.remove(i);
        order.insert(0, hit);
    }
    for n in order {
        let up = online(n.address);
        out.trace.push(Contact {
            address: n.address,
            num_id: n.num_id,
            online: up,
        });
        if up {
            out.result = Some(n.address);
            return out;
        }
        list.retain(|m| m.num_id != n.num_id);
    }
    out
}
