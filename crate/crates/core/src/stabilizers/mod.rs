//! Timeout-failure recovery: what a node does when the lookup neighbor it
//! forwarded a search to does not answer.

mod dks;
mod interlaced;
mod kademlia;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use dks::{dks_init, dks_resolve, DksPointers};
pub use interlaced::{
    interlaced_backup_resolve, interlaced_backup_update, resolve_score, update_score, BackupEntry, BackupTable,
};
pub use kademlia::{kademlia_capacity, kademlia_resolve, kademlia_update, KademliaBuckets};

use crate::overlay::{
    common_prefix_length, Direction, LevelIndex, LookupTable, NameId, NodeAddr, NodeIdentity, PiggybackEntry,
    SearchMessage, TopologySnapshot,
};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StabilizerKind {
    Interlaced,
    Kademlia,
    Dks,
    None,
}

impl StabilizerKind {
    pub const ALL: [StabilizerKind; 4] = [
        StabilizerKind::Interlaced,
        StabilizerKind::Kademlia,
        StabilizerKind::Dks,
        StabilizerKind::None,
    ];
}

impl fmt::Display for StabilizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StabilizerKind::Interlaced => "interlaced",
            StabilizerKind::Kademlia => "kademlia",
            StabilizerKind::Dks => "dks",
            StabilizerKind::None => "none",
        })
    }
}

impl FromStr for StabilizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "interlaced" => Ok(StabilizerKind::Interlaced),
            "kademlia" => Ok(StabilizerKind::Kademlia),
            "dks" => Ok(StabilizerKind::Dks),
            "none" => Ok(StabilizerKind::None),
            _ => Err(Error::config("stabilizer", format!("unknown stabilizer `{s}`"))),
        }
    }
}

impl Serialize for StabilizerKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StabilizerKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One ping attempted during a resolve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Contact {
    pub address: NodeAddr,
    pub num_id: u64,
    pub online: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResolveOutcome {
    pub result: Option<NodeAddr>,
    pub trace: Vec<Contact>,
}

/// A routing candidate must lie on the search direction, not past the target,
/// and must not have been visited by the message already.
pub fn cand_check(num_id: u64, target: u64, direction: Direction, msg: &SearchMessage) -> bool {
    let in_range = match direction {
        Direction::Right => num_id <= target,
        Direction::Left => num_id >= target,
    };
    in_range && !msg.visited(num_id)
}

/// Level and direction an element occupies in `owner`'s tables.
pub(crate) fn placement(owner: &NodeIdentity, num_id: u64, name_id: NameId, levels: usize) -> (usize, Direction) {
    let level = common_prefix_length(owner.name_id, name_id).min(levels.saturating_sub(1));
    let dir = if num_id < owner.num_id {
        Direction::Left
    } else {
        Direction::Right
    };
    (level, dir)
}

/// What a resolve may consult besides the node's own state.
pub struct ResolveEnv<'a> {
    pub topology: &'a TopologySnapshot,
    pub index: &'a LevelIndex,
    pub online: &'a [bool],
}

/// Per-node stabilizer state.
#[derive(Clone, Debug, PartialEq)]
pub enum Stabilizer {
    Interlaced(BackupTable),
    Kademlia(KademliaBuckets),
    Dks(DksPointers),
    None,
}

impl Stabilizer {
    /// Fresh state for a node joining while `online` nodes are up.
    pub fn new(
        kind: StabilizerKind,
        backup_size: usize,
        node: NodeAddr,
        topology: &TopologySnapshot,
        index: &LevelIndex,
        online: &[bool],
    ) -> Self {
        let levels = topology.levels();
        match kind {
            StabilizerKind::Interlaced => Stabilizer::Interlaced(BackupTable::new(levels, backup_size)),
            StabilizerKind::Kademlia => Stabilizer::Kademlia(KademliaBuckets::new(levels, backup_size)),
            StabilizerKind::Dks => Stabilizer::Dks(dks_init(node, topology, index, online, backup_size)),
            StabilizerKind::None => Stabilizer::None,
        }
    }

    pub fn kind(&self) -> StabilizerKind {
        match self {
            Stabilizer::Interlaced(_) => StabilizerKind::Interlaced,
            Stabilizer::Kademlia(_) => StabilizerKind::Kademlia,
            Stabilizer::Dks(_) => StabilizerKind::Dks,
            Stabilizer::None => StabilizerKind::None,
        }
    }

    /// Handles the piggyback list of a message the node routes or initiates.
    pub fn on_message(&mut self, owner: &NodeIdentity, lookup: &LookupTable, piggyback: &[PiggybackEntry]) {
        match self {
            Stabilizer::Interlaced(t) => interlaced_backup_update(t, owner, lookup, piggyback),
            Stabilizer::Kademlia(b) => kademlia_update(b, owner, lookup, piggyback),
            Stabilizer::Dks(_) | Stabilizer::None => {}
        }
    }

    pub fn resolve(
        &mut self,
        owner: &NodeIdentity,
        level: usize,
        direction: Direction,
        msg: &SearchMessage,
        env: &ResolveEnv<'_>,
    ) -> ResolveOutcome {
        let online = |a: NodeAddr| env.online[a.index()];
        match self {
            Stabilizer::Interlaced(t) => interlaced_backup_resolve(t, owner, level, direction, msg, online),
            Stabilizer::Kademlia(b) => kademlia_resolve(b, level, direction, msg, online),
            Stabilizer::Dks(p) => dks_resolve(p, env.topology, env.index, level, direction, msg, online),
            Stabilizer::None => ResolveOutcome::default(),
        }
    }

    /// Number of stored routing candidates.
    pub fn entry_count(&self) -> usize {
        match self {
            Stabilizer::Interlaced(t) => t.len(),
            Stabilizer::Kademlia(b) => b.len(),
            Stabilizer::Dks(p) => p.len(),
            Stabilizer::None => 0,
        }
    }
}
