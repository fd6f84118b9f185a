use std::collections::HashMap;

use serde::Serialize;

use super::edges::{compact, EdgeSet};
use super::lso::shared;
use crate::error::{Error, Result};
use crate::hop::FtTwoHopPathSpanner;
use crate::lso::{LsoKind, OrderingFamily};
use crate::metric::{stretch_ratio, DistanceMatrix, Metric, REL_TOL};

/// f-vertex-fault-tolerant 2-hop spanner built from an LSO family.
///
/// Classic and triangle families use one fault-tolerant path spanner per
/// ordering; rooted families join every point to the first `f+1` points of
/// each ordering containing it.
#[derive(Debug, Clone)]
pub struct FtSpanner {
    fam: OrderingFamily,
    f: usize,
    dist: DistanceMatrix,
    edges: EdgeSet,
    /// Distinct hop structures, one per ordering length.
    hops: Vec<FtTwoHopPathSpanner>,
    /// Index into `hops` for each ordering (unused for rooted families).
    hop_of: Vec<usize>,
    member: Vec<Vec<u32>>,
    stretch: f64,
}

pub fn ft_spanner_from_family<M: Metric + ?Sized>(fam: &OrderingFamily, m: &M, f: usize) -> Result<FtSpanner> {
    if fam.universe() != m.len() {
        return Err(Error::DimensionMismatch {
            expected: m.len(),
            got: fam.universe(),
        });
    }
    let n = m.len();
    let mut edges = EdgeSet::new(n);
    let mut by_len: HashMap<usize, usize> = HashMap::new();
    let mut hops = Vec::new();
    let mut hop_of = Vec::with_capacity(fam.len());
    let mut member = vec![Vec::new(); n];
    for (s, o) in fam.orderings().iter().enumerate() {
        let perm = o.perm();
        for &x in perm {
            member[x].push(s as u32);
        }
        match fam.kind() {
            LsoKind::Rooted => {
                for &z in perm.iter().take(f + 1) {
                    for &y in perm {
                        edges.add(m, y, z);
                    }
                }
            }
            _ => {
                let h = match by_len.get(&o.len()) {
                    Some(&h) => h,
                    None => {
                        hops.push(FtTwoHopPathSpanner::new(o.len(), f)?);
                        by_len.insert(o.len(), hops.len() - 1);
                        hops.len() - 1
                    }
                };
                hop_of.push(h);
                for (a, b) in hops[h].edges() {
                    edges.add(m, perm[a - 1], perm[b - 1]);
                }
            }
        }
    }
    let rho = fam.rho();
    let stretch = match fam.kind() {
        LsoKind::Classic => 1.0 + 2.0 * rho,
        LsoKind::Triangle => 2.0 * rho,
        LsoKind::Rooted if f == 0 => rho,
        LsoKind::Rooted => 2.0 * rho,
    };
    Ok(FtSpanner {
        fam: fam.clone(),
        f,
        dist: DistanceMatrix::from_metric(m),
        edges,
        hops,
        hop_of,
        member,
        stretch,
    })
}

impl FtSpanner {
    pub fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    pub fn fault_budget(&self) -> usize {
        self.f
    }

    /// Declared stretch bound under at most `f` faults.
    pub fn stretch(&self) -> f64 {
        self.stretch
    }

    /// Lightest surviving path of at most two edges from `u` to `v`
    /// avoiding the faulty points.
    pub fn path(&self, u: usize, v: usize, faults: &[usize]) -> Result<Vec<usize>> {
        if faults.len() > self.f {
            return Err(Error::TooManyFaults {
                got: faults.len(),
                budget: self.f,
            });
        }
        for x in [u, v] {
            if faults.contains(&x) {
                return Err(Error::FaultyEndpoint(x));
            }
        }
        if u == v {
            return Ok(vec![u]);
        }
        let mut best: Option<(f64, usize)> = None;
        let consider = |z: usize, best: &mut Option<(f64, usize)>| {
            let w = self.dist.dist(u, z) + self.dist.dist(z, v);
            if best.is_none_or(|b| (w, z) < b) {
                *best = Some((w, z));
            }
        };
        let mut positions = Vec::with_capacity(faults.len());
        for s in shared(&self.member[u], &self.member[v]) {
            let o = &self.fam.orderings()[s];
            let perm = o.perm();
            if self.fam.kind() == LsoKind::Rooted {
                for &z in perm.iter().take(self.f + 1) {
                    if !faults.contains(&z) {
                        consider(z, &mut best);
                    }
                }
                continue;
            }
            positions.clear();
            positions.extend(faults.iter().filter_map(|&x| o.position(x).map(|p| p + 1)));
            let (a, b) = (o.position(u).expect("shared") + 1, o.position(v).expect("shared") + 1);
            let l = self.hops[self.hop_of[s]].query(a, b, &positions)?;
            consider(perm[l - 1], &mut best);
        }
        let (_, z) = best.ok_or(Error::NoSharedOrdering)?;
        Ok(compact(vec![u, z, v]))
    }

    /// Checks every surviving pair under one fault set.
    pub fn check_faults(&self, faults: &[usize]) -> Result<FaultReport> {
        let n = self.dist.len();
        let mut r = FaultReport {
            faults: faults.to_vec(),
            pairs_checked: 0,
            max_stretch: 0.0,
            violation_count: 0,
        };
        for u in (0..n).filter(|x| !faults.contains(x)) {
            for v in (u + 1..n).filter(|x| !faults.contains(x)) {
                r.pairs_checked += 1;
                let p = self.path(u, v, faults)?;
                let mut w = 0.0;
                let mut ok = p.len() <= 3 && p.iter().all(|x| !faults.contains(x));
                for e in p.windows(2) {
                    match self.edges.weight(e[0], e[1]) {
                        Some(x) => w += x,
                        None => ok = false,
                    }
                }
                let ratio = stretch_ratio(w, self.dist.dist(u, v));
                r.max_stretch = r.max_stretch.max(ratio);
                if !ok || ratio > self.stretch * (1.0 + REL_TOL) {
                    r.violation_count += 1;
                }
            }
        }
        Ok(r)
    }
}

/// Residual check of an [`FtSpanner`] under one fault set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaultReport {
    pub faults: Vec<usize>,
    pub pairs_checked: usize,
    pub max_stretch: f64,
    pub violation_count: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{graph_metric, WeightedGraph};

    #[test]
    fn rooted_star_second_point_serves() {
        let g = WeightedGraph::new(4, vec![(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let m = graph_metric(&g).unwrap();
        let fam = OrderingFamily::new(LsoKind::Rooted, 4, 1.0, vec![(Some(0), vec![0, 1, 2, 3])]).unwrap();
        let s = ft_spanner_from_family(&fam, &m, 1).unwrap();
        assert_eq!(s.path(2, 3, &[0]).unwrap(), vec![2, 1, 3]);
        let r = s.check_faults(&[0]).unwrap();
        assert_eq!(r.violation_count, 0);
        assert!(r.max_stretch <= 2.0);
        assert!(matches!(s.path(2, 3, &[0, 1]), Err(Error::TooManyFaults { .. })));
        assert!(matches!(s.path(0, 3, &[0]), Err(Error::FaultyEndpoint(0))));
    }
}
