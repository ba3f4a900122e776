use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::name_id::{common_prefix_length, NameId};
use super::routing::Direction;
use super::topology::{NodeAddr, NodeIdentity, TopologySnapshot};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Neighbor {
    pub address: NodeAddr,
    pub num_id: u64,
    pub name_id: NameId,
}

impl From<&NodeIdentity> for Neighbor {
    fn from(n: &NodeIdentity) -> Self {
        Neighbor {
            address: n.address,
            num_id: n.num_id,
            name_id: n.name_id,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelNeighbors {
    pub left: Option<Neighbor>,
    pub right: Option<Neighbor>,
}

impl LevelNeighbors {
    pub fn get(&self, dir: Direction) -> Option<Neighbor> {
        match dir {
            Direction::Left => self.left,
            Direction::Right => self.right,
        }
    }

    pub fn set(&mut self, dir: Direction, n: Option<Neighbor>) {
        match dir {
            Direction::Left => self.left = n,
            Direction::Right => self.right = n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LookupTable {
    pub levels: Vec<LevelNeighbors>,
}

impl LookupTable {
    pub fn empty(levels: usize) -> Self {
        LookupTable {
            levels: vec![LevelNeighbors::default(); levels],
        }
    }

    pub fn height(&self) -> usize {
        self.levels.len()
    }

    pub fn neighbor(&self, level: usize, dir: Direction) -> Option<Neighbor> {
        self.levels.get(level).and_then(|l| l.get(dir))
    }

    pub fn is_neighbor(&self, num_id: u64) -> bool {
        self.levels.iter().any(|l| {
            l.left.is_some_and(|n| n.num_id == num_id) || l.right.is_some_and(|n| n.num_id == num_id)
        })
    }

    /// Checks ordering and prefix-sharing for every present entry.
    pub fn validate(&self, owner: &NodeIdentity) -> Result<(), String> {
        for (level, entry) in self.levels.iter().enumerate() {
            for (dir, n) in [(Direction::Left, entry.left), (Direction::Right, entry.right)] {
                let Some(n) = n else { continue };
                let ordered = match dir {
                    Direction::Left => n.num_id < owner.num_id,
                    Direction::Right => n.num_id > owner.num_id,
                };
                if !ordered {
                    return Err(format!("level {level} {dir:?} neighbor {} out of order", n.num_id));
                }
                if common_prefix_length(owner.name_id, n.name_id) < level {
                    return Err(format!("level {level} {dir:?} neighbor {} shares too short a prefix", n.num_id));
                }
            }
        }
        Ok(())
    }
}

/// Oracle join: at every level the nearest online nodes by numerical ID among
/// those sharing at least `level` name-ID bits with the joiner.
pub fn join_node(topology: &TopologySnapshot, node: NodeAddr, online: &[bool]) -> LookupTable {
    let levels = topology.levels();
    let me = topology.node(node);
    let mut table = LookupTable::empty(levels);
    for other in &topology.nodes {
        if other.address == node || !online[other.address.index()] {
            continue;
        }
        let shared = common_prefix_length(me.name_id, other.name_id).min(levels.saturating_sub(1));
        let dir = if other.num_id < me.num_id {
            Direction::Left
        } else {
            Direction::Right
        };
        for level in 0..=shared {
            let slot = &mut table.levels[level];
            let closer = match slot.get(dir) {
                None => true,
                Some(cur) => match dir {
                    Direction::Left => other.num_id > cur.num_id,
                    Direction::Right => other.num_id < cur.num_id,
                },
            };
            if closer {
                slot.set(dir, Some(Neighbor::from(other)));
            }
        }
    }
    table
}

/// Links a freshly joined node into its neighbors' lists, as the Skip Graph
/// insertion protocol does: at each level its left neighbor's right pointer and
/// its right neighbor's left pointer are redirected to the joiner.
pub fn splice(tables: &mut [LookupTable], topology: &TopologySnapshot, joiner: NodeAddr) {
    let me = Neighbor::from(topology.node(joiner));
    let joined = tables[joiner.index()].clone();
    for (level, entry) in joined.levels.iter().enumerate() {
        if let Some(l) = entry.left {
            tables[l.address.index()].levels[level].right = Some(me);
        }
        if let Some(r) = entry.right {
            tables[r.address.index()].levels[level].left = Some(me);
        }
    }
}

/// Level lists of the full topology regardless of online status: for each
/// node and level, its immediate predecessor and successor.
#[derive(Clone, Debug)]
pub struct LevelIndex {
    links: Vec<Vec<(Option<NodeAddr>, Option<NodeAddr>)>>,
}

impl LevelIndex {
    pub fn new(topology: &TopologySnapshot) -> Self {
        let levels = topology.levels();
        let mut sorted: Vec<&NodeIdentity> = topology.nodes.iter().collect();
        sorted.sort_by_key(|n| n.num_id);
        let mut links = vec![vec![(None, None); levels]; topology.len()];
        for level in 0..levels {
            let mut last: HashMap<u32, NodeAddr> = HashMap::new();
            for n in &sorted {
                let prefix = if level == 0 { 0 } else { n.name_id.raw() >> (levels - level) };
                if let Some(prev) = last.insert(prefix, n.address) {
                    links[prev.index()][level].1 = Some(n.address);
                    links[n.address.index()][level].0 = Some(prev);
                }
            }
        }
        LevelIndex { links }
    }

    pub fn next(&self, node: NodeAddr, level: usize, dir: Direction) -> Option<NodeAddr> {
        let (l, r) = self.links[node.index()][level];
        match dir {
            Direction::Left => l,
            Direction::Right => r,
        }
    }
}
