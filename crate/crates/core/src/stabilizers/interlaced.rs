//! Interlaced backup tables: scored alternative neighbors collected from
//! piggybacked search traffic.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{cand_check, placement, Contact, ResolveOutcome};
use crate::overlay::{common_prefix_length, Direction, LookupTable, NameId, NodeAddr, NodeIdentity, PiggybackEntry, SearchMessage};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BackupEntry {
    pub address: NodeAddr,
    pub num_id: u64,
    pub name_id: NameId,
    pub sop: f64,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BackupTable {
    sets: Vec<[Vec<BackupEntry>; 2]>,
    max_size: usize,
    len: usize,
}

impl BackupTable {
    pub fn new(levels: usize, max_size: usize) -> Self {
        BackupTable {
            sets: vec![[Vec::new(), Vec::new()]; levels],
            max_size,
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn height(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, level: usize, dir: Direction) -> &[BackupEntry] {
        &self.sets[level][dir.index()]
    }

    pub fn entries(&self) -> impl Iterator<Item = &BackupEntry> {
        self.sets.iter().flat_map(|s| s.iter().flatten())
    }

    pub fn contains(&self, num_id: u64) -> bool {
        self.entries().any(|e| e.num_id == num_id)
    }

    pub fn remove(&mut self, num_id: u64) -> Option<BackupEntry> {
        for set in self.sets.iter_mut().flat_map(|s| s.iter_mut()) {
            if let Some(i) = set.iter().position(|e| e.num_id == num_id) {
                self.len -= 1;
                return Some(set.remove(i));
            }
        }
        None
    }

    fn find_mut(&mut self, num_id: u64) -> Option<&mut BackupEntry> {
        self.sets
            .iter_mut()
            .flat_map(|s| s.iter_mut().flatten())
            .find(|e| e.num_id == num_id)
    }
}

/// Owner-relative score used when deciding what to evict.
pub fn update_score(owner: &NodeIdentity, num_id: u64, name_id: NameId, sop: f64) -> f64 {
    let dist = owner.num_id.abs_diff(num_id);
    assert!(dist > 0, "backup entry shares the owner's numerical ID");
    sop * common_prefix_length(owner.name_id, name_id) as f64 / dist as f64
}

/// Target-relative score used when picking a routing candidate.
pub fn resolve_score(owner_name: NameId, target: u64, num_id: u64, name_id: NameId, sop: f64) -> f64 {
    let dist = target.abs_diff(num_id);
    assert!(dist > 0, "exact target must be returned before scoring");
    sop * common_prefix_length(owner_name, name_id) as f64 / dist as f64
}

/// `Less` when `a` ranks ahead of `b`: higher score, then closer, then the
/// lexicographically smaller name ID.
fn rank(a: (f64, u64, NameId), b: (f64, u64, NameId)) -> Ordering {
    b.0.partial_cmp(&a.0)
        .unwrap_or(Ordering::Equal)
        .then(a.1.cmp(&b.1))
        .then(a.2.cmp(&b.2))
}

pub fn interlaced_backup_update(
    table: &mut BackupTable,
    owner: &NodeIdentity,
    lookup: &LookupTable,
    piggyback: &[PiggybackEntry],
) {
    for e in piggyback {
        if e.num_id == owner.num_id {
            continue;
        }
        if lookup.is_neighbor(e.num_id) {
            table.remove(e.num_id);
            continue;
        }
        if let Some(existing) = table.find_mut(e.num_id) {
            existing.address = e.address;
            existing.name_id = e.name_id;
            existing.sop = e.sop;
            existing.score = update_score(owner, e.num_id, e.name_id, e.sop);
            continue;
        }
        if table.max_size == 0 {
            continue;
        }
        if table.len >= table.max_size {
            let mut worst: Option<(f64, u64, NameId, u64)> = None;
            for set in table.sets.iter_mut().flat_map(|s| s.iter_mut()) {
                for entry in set.iter_mut() {
                    entry.score = update_score(owner, entry.num_id, entry.name_id, entry.sop);
                    let key = (entry.score, owner.num_id.abs_diff(entry.num_id), entry.name_id);
                    let is_worse = match worst {
                        None => true,
                        Some((s, d, n, _)) => rank(key, (s, d, n)) == Ordering::Greater,
                    };
                    if is_worse {
                        worst = Some((key.0, key.1, key.2, entry.num_id));
                    }
                }
            }
            if let Some((.., num_id)) = worst {
                table.remove(num_id);
            }
        }
        let (level, dir) = placement(owner, e.num_id, e.name_id, table.height());
        table.sets[level][dir.index()].push(BackupEntry {
            address: e.address,
            num_id: e.num_id,
            name_id: e.name_id,
            sop: e.sop,
            score: update_score(owner, e.num_id, e.name_id, e.sop),
        });
        table.len += 1;
    }
}

/// Looks for a replacement for the unresponsive `(level, direction)` lookup
/// neighbor. Candidates are pinged best-first; offline ones are dropped from
/// the table. `None` tells the caller to give up on this level.
pub fn interlaced_backup_resolve(
    table: &mut BackupTable,
    owner: &NodeIdentity,
    level: usize,
    direction: Direction,
    msg: &SearchMessage,
    mut online: impl FnMut(NodeAddr) -> bool,
) -> ResolveOutcome {
    let target = msg.target_num_id;
    let mut out = ResolveOutcome::default();
    if level >= table.height() {
        return out;
    }
    let eligible: Vec<BackupEntry> = table.sets[level][direction.index()]
        .iter()
        .filter(|e| cand_check(e.num_id, target, direction, msg))
        .copied()
        .collect();

    let (exact, mut others): (Vec<BackupEntry>, Vec<BackupEntry>) =
        eligible.into_iter().partition(|e| e.num_id == target);
    for e in others.iter_mut() {
        e.score = resolve_score(owner.name_id, target, e.num_id, e.name_id, e.sop);
    }
    others.sort_by(|a, b| {
        rank(
            (a.score, target.abs_diff(a.num_id), a.name_id),
            (b.score, target.abs_diff(b.num_id), b.name_id),
        )
    });

    for e in exact.into_iter().chain(others) {
        let up = online(e.address);
        out.trace.push(Contact {
            address: e.address,
            num_id: e.num_id,
            online: up,
        });
        if up {
            out.result = Some(e.address);
            return out;
        }
        table.remove(e.num_id);
    }
    out
}
