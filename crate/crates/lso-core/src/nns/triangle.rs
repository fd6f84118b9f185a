use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use super::pred::PredecessorSet;
use crate::error::{Error, Result};
use crate::hop::{midpoint, TwoHopPathSpanner};
use crate::lso::{LsoKind, OrderingFamily};
use crate::metric::Metric;

/// A point's view of one triangle ordering: its 1-based position and its
/// responsible 2-hop midpoints with their distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleEntry {
    pub ordering: u32,
    pub position: u32,
    pub len: u32,
    /// `(midpoint position, distance to the midpoint's point)`, sorted.
    pub mids: Vec<(u32, f64)>,
}

impl TriangleEntry {
    fn weight_to(&self, pos: u32) -> Option<f64> {
        if pos == self.position {
            return Some(0.0);
        }
        self.mids
            .binary_search_by_key(&pos, |&(p, _)| p)
            .ok()
            .map(|k| self.mids[k].1)
    }
}

/// Label of a point: one entry per ordering of the family.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TriangleLabel {
    pub entries: Vec<TriangleEntry>,
}

impl TriangleLabel {
    /// Size in machine words: two per entry header plus two per midpoint.
    pub fn words(&self) -> usize {
        self.entries.iter().map(|e| 2 + 2 * e.mids.len()).sum()
    }
}

/// Labels of all points of a triangle family.
pub fn triangle_labels<M: Metric + ?Sized>(fam: &OrderingFamily, m: &M) -> Result<Vec<TriangleLabel>> {
    if fam.kind() != LsoKind::Triangle {
        return Err(Error::KindMismatch {
            expected: LsoKind::Triangle.to_string(),
            got: fam.kind().to_string(),
        });
    }
    let mut labels = vec![TriangleLabel::default(); fam.universe()];
    for (s, o) in fam.orderings().iter().enumerate() {
        let spanner = TwoHopPathSpanner::new(o.len())?;
        let perm = o.perm();
        for (k, &x) in perm.iter().enumerate() {
            let i = k + 1;
            let mids = spanner
                .responsible(i)?
                .into_iter()
                .map(|l| (l as u32, m.dist(x, perm[l - 1])))
                .collect();
            labels[x].entries.push(TriangleEntry {
                ordering: s as u32,
                position: i as u32,
                len: o.len() as u32,
                mids,
            });
        }
    }
    Ok(labels)
}

/// Dynamic labeled nearest-neighbor search over a triangle family. Per
/// ordering, the predecessor and successor of the query among stored points
/// are compared through their shared 2-hop midpoint; the answer is within
/// 2ρ of the true nearest distance.
#[derive(Debug, Clone, Default)]
pub struct TriangleNns {
    sets: HashMap<u32, PredecessorSet>,
    at: HashMap<(u32, u32), usize>,
    stored: HashMap<usize, TriangleLabel>,
}

impl TriangleNns {
    pub fn new() -> Self {
        TriangleNns::default()
    }

    pub fn len(&self) -> usize {
        self.stored.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stored.is_empty()
    }

    pub fn insert(&mut self, id: usize, label: &TriangleLabel) -> Result<bool> {
        if self.stored.contains_key(&id) {
            return Ok(false);
        }
        for e in &label.entries {
            let set = match self.sets.entry(e.ordering) {
                std::collections::hash_map::Entry::Occupied(o) => o.into_mut(),
                std::collections::hash_map::Entry::Vacant(v) => v.insert(PredecessorSet::new(e.len as usize + 1)?),
            };
            set.insert(e.position as usize)?;
            self.at.insert((e.ordering, e.position), id);
        }
        self.stored.insert(id, label.clone());
        Ok(true)
    }

    pub fn remove(&mut self, id: usize) -> Result<bool> {
        let Some(label) = self.stored.remove(&id) else {
            return Ok(false);
        };
        for e in &label.entries {
            if let Some(set) = self.sets.get_mut(&e.ordering) {
                set.remove(e.position as usize)?;
            }
            self.at.remove(&(e.ordering, e.position));
        }
        Ok(true)
    }

    fn entry_of(&self, id: usize, ordering: u32) -> &TriangleEntry {
        let label = &self.stored[&id];
        let k = label
            .entries
            .binary_search_by_key(&ordering, |e| e.ordering)
            .expect("stored label covers every ordering");
        &label.entries[k]
    }

    /// Best stored point and the 2-hop distance estimate, an upper bound on
    /// the true distance. Ties go to the lowest id.
    pub fn query(&self, q: &TriangleLabel) -> Result<(usize, f64)> {
        if self.is_empty() {
            return Err(Error::Empty);
        }
        let mut best: Option<(f64, usize)> = None;
        for e in &q.entries {
            let Some(set) = self.sets.get(&e.ordering) else {
                continue;
            };
            let a = e.position as usize;
            for b in [set.predecessor(a), set.successor(a)].into_iter().flatten() {
                let id = self.at[&(e.ordering, b as u32)];
                let est = if a == b {
                    0.0
                } else {
                    let l = midpoint(a.min(b), a.max(b)) as u32;
                    let other = self.entry_of(id, e.ordering);
                    let (Some(wq), Some(wy)) = (e.weight_to(l), other.weight_to(l)) else {
                        return Err(Error::NoPath(format!("midpoint {l} missing from labels")));
                    };
                    wq + wy
                };
                if best.is_none_or(|bb| (est, id) < bb) {
                    best = Some((est, id));
                }
            }
        }
        let (est, id) = best.ok_or(Error::NoSharedOrdering)?;
        Ok((id, est))
    }
}
