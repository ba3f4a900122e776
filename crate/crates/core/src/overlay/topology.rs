use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::name_id::{NameId, MAX_NAME_BITS};
use crate::error::{Error, Result};

/// Opaque node handle: the node's index in its topology.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeAddr(pub u32);

impl NodeAddr {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeIdentity {
    pub num_id: u64,
    pub name_id: NameId,
    pub address: NodeAddr,
    /// Synthetic placement in the unit square, used by the latency model.
    pub coords: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TopologySnapshot {
    pub capacity: usize,
    pub nodes: Vec<NodeIdentity>,
    pub rng_seed: u64,
}

impl TopologySnapshot {
    /// Builds a snapshot from explicit identities. Addresses are reassigned to
    /// match positions; capacity is the smallest power of two covering them.
    pub fn from_nodes(mut nodes: Vec<NodeIdentity>, rng_seed: u64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::config("nodes", "topology must contain at least one node"));
        }
        let capacity = nodes.len().next_power_of_two();
        let levels = capacity.trailing_zeros() as usize;
        let mut nums = HashSet::new();
        let mut names = HashSet::new();
        for (i, node) in nodes.iter_mut().enumerate() {
            node.address = NodeAddr(i as u32);
            if node.name_id.len() != levels {
                return Err(Error::config(
                    "nameId",
                    format!("node {} has a {}-bit name ID, expected {levels}", node.num_id, node.name_id.len()),
                ));
            }
            if !nums.insert(node.num_id) {
                return Err(Error::config("numId", format!("duplicate numerical ID {}", node.num_id)));
            }
            if !names.insert(node.name_id) {
                return Err(Error::config("nameId", format!("duplicate name ID {}", node.name_id)));
            }
        }
        Ok(TopologySnapshot {
            capacity,
            nodes,
            rng_seed,
        })
    }

    /// Number of lookup-table levels, log2(capacity).
    pub fn levels(&self) -> usize {
        self.capacity.trailing_zeros() as usize
    }

    pub fn node(&self, addr: NodeAddr) -> &NodeIdentity {
        &self.nodes[addr.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let snapshot: TopologySnapshot = serde_json::from_str(s)?;
        let seed = snapshot.rng_seed;
        Self::from_nodes(snapshot.nodes, seed)
    }
}

/// Generates `capacity` nodes with unique random numerical IDs in [0, 2^32),
/// uniform coordinates and locality-aware name IDs.
pub fn generate_topology(capacity: usize, seed: u64) -> Result<TopologySnapshot> {
    if capacity < 2 || !capacity.is_power_of_two() {
        return Err(Error::config("capacity", "capacity must be a power of two"));
    }
    if capacity.trailing_zeros() > MAX_NAME_BITS as u32 {
        return Err(Error::config("capacity", "capacity too large"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(capacity);
    let mut num_ids = Vec::with_capacity(capacity);
    while num_ids.len() < capacity {
        let id = rng.random::<u32>() as u64;
        if seen.insert(id) {
            num_ids.push(id);
        }
    }
    let coords: Vec<(f64, f64)> = (0..capacity)
        .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    let names = assign_name_ids(&coords)?;
    let nodes = num_ids
        .into_iter()
        .zip(coords)
        .zip(names)
        .enumerate()
        .map(|(i, ((num_id, coords), name_id))| NodeIdentity {
            num_id,
            name_id,
            address: NodeAddr(i as u32),
            coords,
        })
        .collect();
    Ok(TopologySnapshot {
        capacity,
        nodes,
        rng_seed: seed,
    })
}

/// Recursive median bisection with alternating axes (x first). At depth `d`
/// the lower half of the current cell gets bit `d` = 0, the upper half 1.
/// Equal coordinates are ordered by input index.
pub fn assign_name_ids(coords: &[(f64, f64)]) -> Result<Vec<NameId>> {
    let count = coords.len();
    if count == 0 || !count.is_power_of_two() {
        return Err(Error::config("coords", "number of points must be a power of two"));
    }
    if let Some((i, _)) = coords
        .iter()
        .enumerate()
        .find(|(_, (x, y))| !(0.0..=1.0).contains(x) || !(0.0..=1.0).contains(y))
    {
        return Err(Error::config("coords", format!("point {i} lies outside the unit square")));
    }
    let len = count.trailing_zeros() as u8;
    let mut names = vec![NameId::new(0, len); count];
    let mut order: Vec<usize> = (0..count).collect();
    bisect(coords, &mut order, 0, &mut names);
    Ok(names)
}

fn bisect(coords: &[(f64, f64)], cell: &mut [usize], depth: usize, names: &mut [NameId]) {
    if cell.len() < 2 {
        return;
    }
    let key = |i: usize| if depth.is_multiple_of(2) { coords[i].0 } else { coords[i].1 };
    cell.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
    let half = cell.len() / 2;
    for &i in &cell[half..] {
        names[i] = names[i].with_bit(depth, 1);
    }
    let (lower, upper) = cell.split_at_mut(half);
    bisect(coords, lower, depth + 1, names);
    bisect(coords, upper, depth + 1, names);
}
