use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{build_epsilon_net, Metric, REL_TOL};
use crate::rng::rng_for;

/// Attempts allowed before a padded cover gives up.
pub const MAX_PARTITIONS: usize = 64;

/// A partition of the points into clusters of diameter at most `delta`.
/// Cluster ids are contiguous from 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    pub cluster: Vec<usize>,
    pub delta: f64,
}

impl Partition {
    /// Renumbers arbitrary labels to contiguous ids in order of first
    /// appearance.
    pub fn from_labels(labels: &[usize], delta: f64) -> Self {
        let mut map = std::collections::HashMap::new();
        let cluster = labels
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        Partition { cluster, delta }
    }

    pub fn len(&self) -> usize {
        self.cluster.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cluster.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster.iter().map(|&c| c + 1).max().unwrap_or(0)
    }

    /// Members of each cluster, ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cluster_count()];
        for (x, &c) in self.cluster.iter().enumerate() {
            out[c].push(x);
        }
        out
    }

    /// Largest cluster diameter, by exhaustive scan.
    pub fn max_diameter<M: Metric + ?Sized>(&self, m: &M) -> f64 {
        self.clusters()
            .iter()
            .map(|c| cluster_diameter(m, c))
            .fold(0.0, f64::max)
    }

    /// Whether every point within distance `r` of `x` shares its cluster.
    pub fn pads<M: Metric + ?Sized>(&self, m: &M, x: usize, r: f64) -> bool {
        (0..self.len()).all(|y| self.cluster[y] == self.cluster[x] || m.dist(x, y) > r)
    }

    /// Checks the diameter bound.
    pub fn validate<M: Metric + ?Sized>(&self, m: &M) -> Result<()> {
        for (c, members) in self.clusters().iter().enumerate() {
            let diameter = cluster_diameter(m, members);
            if diameter > self.delta * (1.0 + REL_TOL) {
                return Err(Error::DiameterViolation {
                    level: 0,
                    cluster: c,
                    diameter,
                    bound: self.delta,
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn cluster_diameter<M: Metric + ?Sized>(m: &M, members: &[usize]) -> f64 {
    let mut d = 0.0f64;
    for (k, &a) in members.iter().enumerate() {
        for &b in &members[k + 1..] {
            d = d.max(m.dist(a, b));
        }
    }
    d
}

/// Collection of `Δ`-bounded partitions such that every point's
/// `Δ/ρ`-ball lies inside one cluster of some partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaddedPartitionCover {
    pub partitions: Vec<Partition>,
    pub rho: f64,
    pub delta: f64,
}

impl PaddedPartitionCover {
    pub fn tau(&self) -> usize {
        self.partitions.len()
    }

    /// First partition padding `x`.
    pub fn padded_in<M: Metric + ?Sized>(&self, m: &M, x: usize) -> Option<usize> {
        let r = self.delta / self.rho;
        self.partitions.iter().position(|p| p.pads(m, x, r))
    }

    /// Exhaustive check of both the diameter bound and the padding property.
    pub fn verify<M: Metric + ?Sized>(&self, m: &M) -> Result<()> {
        for p in &self.partitions {
            p.validate(m)?;
        }
        for x in 0..m.len() {
            if self.padded_in(m, x).is_none() {
                return Err(Error::PaddingFailed {
                    point: x,
                    radius: self.delta / self.rho,
                });
            }
        }
        Ok(())
    }
}

/// Ball carving with radius `Δ/2`. Centers are taken in order: first
/// `priority` (each grabs its whole unassigned ball), then the remaining
/// `net` points in the given order.
fn carve<M: Metric + ?Sized>(m: &M, delta: f64, priority: &[usize], net: &[usize]) -> Vec<usize> {
    let n = m.len();
    let radius = delta / 2.0;
    let mut label = vec![usize::MAX; n];
    let mut next = 0usize;
    for &c in priority.iter().chain(net) {
        let mut used = false;
        for y in 0..n {
            if label[y] == usize::MAX && m.dist(c, y) <= radius {
                label[y] = next;
                used = true;
            }
        }
        if used {
            next += 1;
        }
    }
    debug_assert!(label.iter().all(|&l| l != usize::MAX), "net covers every point");
    label
}

/// Padded partition cover at scale `Δ` with padding factor `t ≥ 2`.
///
/// Each partition is a ball carving of radius `Δ/2`. Its first centers are
/// currently unpadded points, chosen greedily in random order and pairwise
/// more than `Δ/2 + Δ/t` apart so that no center's ball reaches another's
/// padding ball. The remaining points are carved by a `Δ/4`-net in random
/// order. Each partition therefore pads at least one new point. When `Δ`
/// reaches the diameter a single one-cluster partition is returned.
pub fn build_padded_partition_cover<M: Metric + ?Sized>(
    m: &M,
    delta: f64,
    t: f64,
    seed: u64,
) -> Result<PaddedPartitionCover> {
    if m.is_empty() {
        return Err(Error::Empty);
    }
    if !(delta > 0.0) || !(t >= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "need Δ>0 and t≥2, got Δ={delta}, t={t}"
        )));
    }
    let n = m.len();
    let pad = delta / t;
    let diameter = cluster_diameter(m, &(0..n).collect::<Vec<_>>());
    if diameter <= delta {
        return Ok(PaddedPartitionCover {
            partitions: vec![Partition {
                cluster: vec![0; n],
                delta,
            }],
            rho: t,
            delta,
        });
    }
    let net = build_epsilon_net(m, delta / 4.0)?;
    let mut padded = vec![false; n];
    let mut partitions = Vec::new();
    for attempt in 0..MAX_PARTITIONS {
        let mut rng = rng_for(seed, "padded-cover", attempt as u64);
        let mut open: Vec<usize> = (0..n).filter(|&x| !padded[x]).collect();
        if open.is_empty() {
            break;
        }
        open.shuffle(&mut rng);
        let mut priority: Vec<usize> = Vec::new();
        for x in open {
            if priority.iter().all(|&c| m.dist(c, x) > delta / 2.0 + pad) {
                priority.push(x);
            }
        }
        let mut order = net.clone();
        order.shuffle(&mut rng);
        let p = Partition::from_labels(&carve(m, delta, &priority, &order), delta);
        let mut gained = false;
        for x in 0..n {
            if !padded[x] && p.pads(m, x, pad) {
                padded[x] = true;
                gained = true;
            }
        }
        if gained {
            partitions.push(p);
        }
    }
    if let Some(x) = (0..n).find(|&x| !padded[x]) {
        return Err(Error::PaddingFailed { point: x, radius: pad });
    }
    Ok(PaddedPartitionCover {
        partitions,
        rho: t,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::DistanceMatrix;

    fn uniform(n: usize) -> DistanceMatrix {
        DistanceMatrix::from_rows(
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn large_delta_gives_one_cluster() {
        let c = build_padded_partition_cover(&uniform(5), 2.0, 4.0, 1).unwrap();
        assert_eq!(c.tau(), 1);
        assert_eq!(c.partitions[0].cluster_count(), 1);
    }

    #[test]
    fn small_delta_gives_singletons() {
        let m = uniform(6);
        let c = build_padded_partition_cover(&m, 0.5, 4.0, 1).unwrap();
        assert_eq!(c.tau(), 1);
        assert_eq!(c.partitions[0].cluster_count(), 6);
        c.verify(&m).unwrap();
    }

    #[test]
    fn relabeling_is_contiguous() {
        let p = Partition::from_labels(&[7, 3, 7, 9], 1.0);
        assert_eq!(p.cluster, vec![0, 1, 0, 2]);
    }
}
