//! DKS-style successor lists: at join time a node records the run of nodes
//! following its lookup neighbor at every level, and on failure shifts the
//! run outward one node at a time.

use std::collections::VecDeque;

use super::kademlia::kademlia_capacity;
use super::{cand_check, Contact, ResolveOutcome};
use crate::overlay::{Direction, LevelIndex, Neighbor, NodeAddr, SearchMessage, TopologySnapshot};

#[derive(Clone, Debug, PartialEq)]
pub struct DksPointers {
    lists: Vec<[VecDeque<Neighbor>; 2]>,
    /// Furthest node examined so far per list, in full-topology order.
    cursors: Vec<[Option<NodeAddr>; 2]>,
}

impl DksPointers {
    pub fn list(&self, level: usize, dir: Direction) -> &VecDeque<Neighbor> {
        &self.lists[level][dir.index()]
    }

    pub fn len(&self) -> usize {
        self.lists.iter().flatten().map(VecDeque::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Fills each list with the online nodes that follow the nearest online node
/// (the lookup neighbor) in the level's list, up to the Kademlia capacity split of `b`.
pub fn dks_init(
    node: NodeAddr,
    topology: &TopologySnapshot,
    index: &LevelIndex,
    online: &[bool],
    b: usize,
) -> DksPointers {
    let levels = topology.levels();
    let caps = kademlia_capacity(b, levels);
    let mut lists = vec![[VecDeque::new(), VecDeque::new()]; levels];
    let mut cursors = vec![[None, None]; levels];
    for level in 0..levels {
        for dir in [Direction::Left, Direction::Right] {
            let cap = caps[level][dir.index()];
            if cap == 0 {
                continue;
            }
            // Skip up to and including the first online node, the lookup neighbor.
            let mut cur = node;
            loop {
                match index.next(cur, level, dir) {
                    Some(next) => {
                        cur = next;
                        if online[next.index()] {
                            break;
                        }
                    }
                    None => break,
                }
            }
            if cur == node {
                continue;
            }
            let list = &mut lists[level][dir.index()];
            while list.len() < cap {
                let Some(next) = index.next(cur, level, dir) else { break };
                cur = next;
                if online[next.index()] {
                    list.push_back(Neighbor::from(topology.node(next)));
                }
            }
            cursors[level][dir.index()] = Some(cur);
        }
    }
    DksPointers { lists, cursors }
}

/// Pings list members in order. An offline member is dropped and the node
/// after the current tail, whatever its status, is appended.
pub fn dks_resolve(
    pointers: &mut DksPointers,
    topology: &TopologySnapshot,
    index: &LevelIndex,
    level: usize,
    direction: Direction,
    msg: &SearchMessage,
    mut online: impl FnMut(NodeAddr) -> bool,
) -> ResolveOutcome {
    let target = msg.target_num_id;
    let mut out = ResolveOutcome::default();
    if level >= pointers.lists.len() {
        return out;
    }
    let d = direction.index();
    let mut i = 0;
    while i < pointers.lists[level][d].len() {
        let n = pointers.lists[level][d][i];
        if !cand_check(n.num_id, target, direction, msg) {
            i += 1;
            continue;
        }
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
        pointers.lists[level][d].remove(i);
        let next = pointers.cursors[level][d].and_then(|c| index.next(c, level, direction));
        if let Some(next) = next {
            pointers.cursors[level][d] = Some(next);
            pointers.lists[level][d].push_back(Neighbor::from(topology.node(next)));
        }
    }
    out
}
