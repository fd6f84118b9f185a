use serde::Serialize;

use super::cover::{cluster_diameter, Partition};
use crate::error::{Error, Result};
use crate::hst::Hst;
use crate::metric::{Metric, REL_TOL};

/// A chain of nested partitions, finest first. `levels[i][x]` is the
/// cluster of `x` at level `i`; `labels[i]` is the HST label given to
/// level-`i` clusters. Below level 0 every point is a singleton.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaminarHierarchy {
    pub levels: Vec<Vec<usize>>,
    pub labels: Vec<f64>,
}

impl LaminarHierarchy {
    pub fn points(&self) -> usize {
        self.levels.first().map_or(0, Vec::len)
    }

    /// Checks that each level refines the next one.
    pub fn check_laminar(&self) -> Result<()> {
        for i in 1..self.levels.len() {
            let mut up: std::collections::HashMap<usize, usize> = Default::default();
            for (x, &c) in self.levels[i - 1].iter().enumerate() {
                let u = self.levels[i][x];
                if *up.entry(c).or_insert(u) != u {
                    return Err(Error::InvalidParameter(format!(
                        "level {} cluster {c} is split by level {i}",
                        i - 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Turns per-scale partitions into a laminar chain.
///
/// Level `i` processes the clusters `C_q` of `partitions[i]` in ascending
/// id. The unclaimed part `C'_q` collects every previous-level cluster it
/// meets, and their union becomes the new cluster. Each new cluster must
/// have diameter at most `(1+ε)·Δ_i`.
pub fn laminarize<M: Metric + ?Sized>(m: &M, partitions: &[Partition], eps: f64) -> Result<LaminarHierarchy> {
    let n = m.len();
    let mut prev: Vec<usize> = (0..n).collect();
    let mut prev_members: Vec<Vec<usize>> = (0..n).map(|x| vec![x]).collect();
    let mut levels = Vec::with_capacity(partitions.len());
    let mut labels = Vec::with_capacity(partitions.len());
    for (i, p) in partitions.iter().enumerate() {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
        let mut next = vec![usize::MAX; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut taken = vec![false; prev_members.len()];
        for cluster in p.clusters() {
            let mut merged = Vec::new();
            for &x in &cluster {
                if next[x] != usize::MAX {
                    continue;
                }
                let s = prev[x];
                if taken[s] {
                    continue;
                }
                taken[s] = true;
                merged.extend_from_slice(&prev_members[s]);
            }
            if merged.is_empty() {
                continue;
            }
            merged.sort_unstable();
            let id = members.len();
            for &y in &merged {
                next[y] = id;
            }
            let diameter = cluster_diameter(m, &merged);
            let bound = (1.0 + eps) * p.delta;
            if diameter > bound * (1.0 + REL_TOL) {
                return Err(Error::DiameterViolation {
                    level: i,
                    cluster: id,
                    diameter,
                    bound,
                });
            }
            members.push(merged);
        }
        labels.push((1.0 + eps) * p.delta);
        levels.push(next.clone());
        prev = next;
        prev_members = members;
    }
    Ok(LaminarHierarchy { levels, labels })
}

/// HST whose internal nodes are the clusters of the chain, labelled by
/// their level. A cluster equal to its only child is merged into it. The
/// top level must be a single cluster.
pub fn hierarchy_to_hst(h: &LaminarHierarchy) -> Result<Hst> {
    let n = h.points();
    if n == 0 {
        return Err(Error::Empty);
    }
    h.check_laminar()?;
    if let Some(top) = h.levels.last() {
        if top.iter().any(|&c| c != top[0]) {
            return Err(Error::InvalidParameter("top level has more than one cluster".into()));
        }
    } else if n > 1 {
        return Err(Error::InvalidParameter("empty chain over several points".into()));
    }
    // node of each cluster of the level below, starting from the leaves
    let mut gamma = vec![0.0; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut below: Vec<usize> = (0..n).collect(); // node per point at the previous level
    for (level, label) in h.levels.iter().zip(&h.labels) {
        let count = level.iter().map(|&c| c + 1).max().unwrap_or(0);
        let mut kids: Vec<Vec<usize>> = vec![Vec::new(); count];
        for x in 0..n {
            let node = below[x];
            let k = &mut kids[level[x]];
            if !k.contains(&node) {
                k.push(node);
            }
        }
        let mut node_of = vec![0usize; count];
        for (c, k) in kids.into_iter().enumerate() {
            if k.len() == 1 {
                node_of[c] = k[0];
            } else {
                node_of[c] = gamma.len();
                gamma.push(*label);
                children.push(k);
            }
        }
        for x in 0..n {
            below[x] = node_of[level[x]];
        }
    }
    Hst::new(gamma, children, (0..n).collect())
}
