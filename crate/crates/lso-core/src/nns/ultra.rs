use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use super::lca::{lca_from_labels, lca_labels, LcaLabel};
use super::pred::PredecessorSet;
use crate::error::{Error, Result};
use crate::hst::Hst;

/// Label of a point for exact ultrametric search: its preorder position and
/// the LCA label of its leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UltraLabel {
    pub position: usize,
    pub lca: LcaLabel,
}

/// Query strategy for ultrametric search. Only the exact LCA strategy is
/// implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UltraStrategy {
    LcaExact,
    DistanceLabeling,
    JohnsonLindenstrauss,
}

/// Labels for every point of `hst`, positions following [`Hst::preorder`].
pub fn ultrametric_labels(hst: &Hst) -> Vec<UltraLabel> {
    let node_labels = lca_labels(hst);
    let mut labels = vec![None; hst.points()];
    for (k, x) in hst.preorder().into_iter().enumerate() {
        labels[x] = Some(UltraLabel {
            position: k,
            lca: node_labels[hst.leaf_of(x)].clone(),
        });
    }
    labels.into_iter().map(|l| l.expect("every point is a leaf")).collect()
}

/// Dynamic exact nearest-neighbor search in an ultrametric, working on
/// labels only: the nearest stored point is the predecessor or successor of
/// the query's preorder position, and distances come from LCA labels.
#[derive(Debug, Clone)]
pub struct UltrametricNns {
    set: PredecessorSet,
    stored: HashMap<usize, (usize, UltraLabel)>,
}

impl UltrametricNns {
    /// An empty structure for labels with positions below `universe`.
    pub fn new(universe: usize, strategy: UltraStrategy) -> Result<Self> {
        if strategy != UltraStrategy::LcaExact {
            return Err(Error::OutOfScope(format!("{strategy:?} ultrametric search")));
        }
        Ok(UltrametricNns {
            set: PredecessorSet::new(universe.max(1))?,
            stored: HashMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.stored.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stored.is_empty()
    }

    pub fn insert(&mut self, id: usize, label: &UltraLabel) -> Result<bool> {
        let fresh = self.set.insert(label.position)?;
        self.stored.insert(label.position, (id, label.clone()));
        Ok(fresh)
    }

    pub fn remove(&mut self, label: &UltraLabel) -> Result<bool> {
        self.stored.remove(&label.position);
        self.set.remove(label.position)
    }

    /// Nearest stored point and its exact distance; ties go to the lowest id.
    pub fn query(&self, q: &UltraLabel) -> Result<(usize, f64)> {
        if self.is_empty() {
            return Err(Error::Empty);
        }
        let mut best: Option<(f64, usize)> = None;
        for pos in [self.set.predecessor(q.position), self.set.successor(q.position)]
            .into_iter()
            .flatten()
        {
            let (id, label) = &self.stored[&pos];
            let d = if pos == q.position {
                0.0
            } else {
                lca_from_labels(&q.lca, &label.lca).1
            };
            if best.is_none_or(|(bd, bid)| (d, *id) < (bd, bid)) {
                best = Some((d, *id));
            }
        }
        let (d, id) = best.expect("nonempty set has a neighbor");
        Ok((id, d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Hst {
        Hst::new(
            vec![4.0, 2.0, 0.0, 0.0, 0.0],
            vec![vec![1, 4], vec![2, 3], vec![], vec![], vec![]],
            vec![2, 3, 4],
        )
        .unwrap()
    }

    #[test]
    fn query_point_in_set_is_its_own_neighbor() {
        let h = small();
        let labels = ultrametric_labels(&h);
        let mut s = UltrametricNns::new(3, UltraStrategy::LcaExact).unwrap();
        s.insert(1, &labels[1]).unwrap();
        assert_eq!(s.query(&labels[1]).unwrap(), (1, 0.0));
        assert_eq!(s.query(&labels[0]).unwrap(), (1, 2.0));
        assert_eq!(s.query(&labels[2]).unwrap(), (1, 4.0));
    }

    #[test]
    fn other_strategies_are_out_of_scope() {
        assert!(matches!(
            UltrametricNns::new(4, UltraStrategy::JohnsonLindenstrauss),
            Err(Error::OutOfScope(_))
        ));
    }

    #[test]
    fn empty_set_errors() {
        let h = small();
        let labels = ultrametric_labels(&h);
        let s = UltrametricNns::new(3, UltraStrategy::LcaExact).unwrap();
        assert_eq!(s.query(&labels[0]), Err(Error::Empty));
    }
}
