use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use super::pred::PredecessorSet;
use crate::error::{Error, Result};
use crate::lso::{LsoKind, OrderingFamily};
use crate::metric::Metric;

/// Membership of a point in one rooted ordering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootedEntry {
    pub ordering: u32,
    pub position: u32,
    /// Length of the ordering, which bounds its positions.
    pub len: u32,
    /// Distance from the point to the ordering's root.
    pub to_root: f64,
}

/// Label of a point: one entry per rooted ordering containing it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RootedLabel {
    pub entries: Vec<RootedEntry>,
}

/// Labels of all points of a rooted family.
pub fn rooted_labels<M: Metric + ?Sized>(fam: &OrderingFamily, m: &M) -> Result<Vec<RootedLabel>> {
    if fam.kind() != LsoKind::Rooted {
        return Err(Error::KindMismatch {
            expected: LsoKind::Rooted.to_string(),
            got: fam.kind().to_string(),
        });
    }
    let mut labels = vec![RootedLabel::default(); fam.universe()];
    for (s, o) in fam.orderings().iter().enumerate() {
        let r = o.root().expect("rooted ordering");
        for (k, &x) in o.perm().iter().enumerate() {
            labels[x].entries.push(RootedEntry {
                ordering: s as u32,
                position: k as u32,
                len: o.len() as u32,
                to_root: m.dist(x, r),
            });
        }
    }
    Ok(labels)
}

/// Dynamic labeled nearest-neighbor search over a rooted family. For each
/// ordering of the query, the stored point closest to that ordering's root is
/// its minimum position; the answer minimizes d(q, root) + d(root, y).
#[derive(Debug, Clone, Default)]
pub struct RootedNns {
    sets: HashMap<u32, PredecessorSet>,
    at: HashMap<(u32, u32), (usize, f64)>,
    stored: HashMap<usize, RootedLabel>,
}

impl RootedNns {
    pub fn new() -> Self {
        RootedNns::default()
    }

    pub fn len(&self) -> usize {
        self.stored.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stored.is_empty()
    }

    pub fn insert(&mut self, id: usize, label: &RootedLabel) -> Result<bool> {
        if self.stored.contains_key(&id) {
            return Ok(false);
        }
        for e in &label.entries {
            let set = match self.sets.entry(e.ordering) {
                std::collections::hash_map::Entry::Occupied(o) => o.into_mut(),
                std::collections::hash_map::Entry::Vacant(v) => v.insert(PredecessorSet::new(e.len as usize)?),
            };
            set.insert(e.position as usize)?;
            self.at.insert((e.ordering, e.position), (id, e.to_root));
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

    /// Best stored point and the distance estimate d(q, r) + d(r, y), which
    /// upper-bounds d(q, y). Ties go to the lowest id.
    pub fn query(&self, q: &RootedLabel) -> Result<(usize, f64)> {
        if self.is_empty() {
            return Err(Error::Empty);
        }
        let mut best: Option<(f64, usize)> = None;
        for e in &q.entries {
            // the query point itself is stored; it need not be any root
            if let Some(&(id, _)) = self.at.get(&(e.ordering, e.position)) {
                return Ok((id, 0.0));
            }
            let Some(pos) = self.sets.get(&e.ordering).and_then(|s| s.min()) else {
                continue;
            };
            let (id, to_root) = self.at[&(e.ordering, pos as u32)];
            let est = e.to_root + to_root;
            if best.is_none_or(|b| (est, id) < b) {
                best = Some((est, id));
            }
        }
        let (est, id) = best.ok_or(Error::NoSharedOrdering)?;
        Ok((id, est))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lso::build_rooted_lso_tree;
    use crate::metric::{graph_metric, WeightedGraph};

    #[test]
    fn root_only_set_gives_exact_distance() {
        let g = WeightedGraph::new(5, vec![(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 4, 3.0)]).unwrap();
        let fam = build_rooted_lso_tree(&g).unwrap();
        let m = graph_metric(&g).unwrap();
        let labels = rooted_labels(&fam, &m).unwrap();
        let root = fam.orderings()[0].root().unwrap();
        let mut s = RootedNns::new();
        s.insert(root, &labels[root]).unwrap();
        for q in 0..5 {
            assert_eq!(s.query(&labels[q]).unwrap(), (root, m.dist(q, root)));
        }
        s.remove(root).unwrap();
        assert_eq!(s.query(&labels[0]), Err(Error::Empty));
    }

    #[test]
    fn disjoint_orderings_report_no_shared_ordering() {
        let fam = OrderingFamily::new(LsoKind::Rooted, 2, 1.0, vec![(Some(0), vec![0]), (Some(1), vec![1])]).unwrap();
        let m = crate::metric::DistanceMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let labels = rooted_labels(&fam, &m).unwrap();
        let mut s = RootedNns::new();
        s.insert(1, &labels[1]).unwrap();
        assert_eq!(s.query(&labels[0]), Err(Error::NoSharedOrdering));
    }
}
