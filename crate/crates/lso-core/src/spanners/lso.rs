use std::collections::HashMap;

use super::edges::{compact, EdgeSet, PathReporting};
use crate::error::{Error, Result};
use crate::hop::{midpoint, TwoHopPathSpanner};
use crate::lso::{LsoKind, OrderingFamily};
use crate::metric::{DistanceMatrix, Metric};

fn check_universe<M: Metric + ?Sized>(fam: &OrderingFamily, m: &M) -> Result<()> {
    if fam.universe() != m.len() {
        return Err(Error::DimensionMismatch {
            expected: m.len(),
            got: fam.universe(),
        });
    }
    Ok(())
}

/// 2-hop path-reporting spanner from a classic or triangle family: the
/// union of one 2-hop path spanner per ordering. A query takes the
/// midpoint path in every ordering and returns the lightest.
#[derive(Debug, Clone)]
pub struct OrderingSpanner {
    fam: OrderingFamily,
    dist: DistanceMatrix,
    edges: EdgeSet,
    stretch: f64,
}

/// Classic family with stretch ρ → 2-hop `(1+2ρ)`-spanner.
pub fn pr_spanner_from_classic<M: Metric + ?Sized>(fam: &OrderingFamily, m: &M) -> Result<OrderingSpanner> {
    ordering_spanner(fam, m, LsoKind::Classic, 1.0 + 2.0 * fam.rho())
}

/// Triangle family with stretch ρ → 2-hop `2ρ`-spanner.
pub fn pr_spanner_from_triangle<M: Metric + ?Sized>(fam: &OrderingFamily, m: &M) -> Result<OrderingSpanner> {
    ordering_spanner(fam, m, LsoKind::Triangle, 2.0 * fam.rho())
}

fn ordering_spanner<M: Metric + ?Sized>(
    fam: &OrderingFamily,
    m: &M,
    kind: LsoKind,
    stretch: f64,
) -> Result<OrderingSpanner> {
    if fam.kind() != kind {
        return Err(Error::KindMismatch {
            expected: kind.to_string(),
            got: fam.kind().to_string(),
        });
    }
    check_universe(fam, m)?;
    let mut edges = EdgeSet::new(m.len());
    let mut hop: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for o in fam.orderings() {
        let pairs = match hop.get(&o.len()) {
            Some(p) => p,
            None => {
                let p = TwoHopPathSpanner::new(o.len())?.edges();
                hop.entry(o.len()).or_insert(p)
            }
        };
        let perm = o.perm();
        for &(a, b) in pairs {
            edges.add(m, perm[a - 1], perm[b - 1]);
        }
    }
    Ok(OrderingSpanner {
        fam: fam.clone(),
        dist: DistanceMatrix::from_metric(m),
        edges,
        stretch,
    })
}

impl OrderingSpanner {
    pub fn family(&self) -> &OrderingFamily {
        &self.fam
    }

    /// Midpoint path of `u` and `v` in ordering `s`, with its weight.
    pub fn path_in(&self, s: usize, u: usize, v: usize) -> Result<(Vec<usize>, f64)> {
        let (z, w) = self.via(s, u, v)?;
        Ok((compact(vec![u, z, v]), w))
    }

    /// Midpoint of `u` and `v` in ordering `s` and the weight through it.
    fn via(&self, s: usize, u: usize, v: usize) -> Result<(usize, f64)> {
        let o = self.fam.orderings().get(s).ok_or(Error::OutOfRange {
            index: s,
            size: self.fam.len(),
        })?;
        let (Some(a), Some(b)) = (o.position(u), o.position(v)) else {
            return Err(Error::NoPath(format!("ordering {s} misses {u} or {v}")));
        };
        let l = midpoint(a.min(b) + 1, a.max(b) + 1);
        let z = o.perm()[l - 1];
        Ok((z, self.dist.dist(u, z) + self.dist.dist(z, v)))
    }
}

impl PathReporting for OrderingSpanner {
    fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    fn stretch(&self) -> f64 {
        self.stretch
    }

    fn hops(&self) -> usize {
        2
    }

    fn path(&self, u: usize, v: usize) -> Result<Vec<usize>> {
        let mut best: Option<(f64, usize)> = None;
        for s in 0..self.fam.len() {
            let (z, w) = self.via(s, u, v)?;
            if best.is_none_or(|(bw, _)| w < bw) {
                best = Some((w, z));
            }
        }
        best.map(|(_, z)| compact(vec![u, z, v])).ok_or(Error::NoSharedOrdering)
    }
}

/// 2-hop `ρ`-spanner from a rooted family: every point is joined to the
/// root of each ordering containing it, and a query routes through the best
/// shared root.
#[derive(Debug, Clone)]
pub struct RootedSpanner {
    roots: Vec<usize>,
    /// Orderings containing each point, ascending.
    member: Vec<Vec<u32>>,
    dist: DistanceMatrix,
    edges: EdgeSet,
    stretch: f64,
}

pub fn pr_spanner_from_rooted<M: Metric + ?Sized>(fam: &OrderingFamily, m: &M) -> Result<RootedSpanner> {
    if fam.kind() != LsoKind::Rooted {
        return Err(Error::KindMismatch {
            expected: LsoKind::Rooted.to_string(),
            got: fam.kind().to_string(),
        });
    }
    check_universe(fam, m)?;
    let mut edges = EdgeSet::new(m.len());
    let mut member = vec![Vec::new(); m.len()];
    let mut roots = Vec::with_capacity(fam.len());
    for (s, o) in fam.orderings().iter().enumerate() {
        let r = o.root().expect("rooted ordering has a root");
        roots.push(r);
        for &y in o.perm() {
            edges.add(m, y, r);
            member[y].push(s as u32);
        }
    }
    Ok(RootedSpanner {
        roots,
        member,
        dist: DistanceMatrix::from_metric(m),
        edges,
        stretch: fam.rho(),
    })
}

/// Ordering ids shared by two ascending lists.
pub(crate) fn shared<'a>(a: &'a [u32], b: &'a [u32]) -> impl Iterator<Item = usize> + 'a {
    let mut j = 0;
    a.iter().filter_map(move |&s| {
        while j < b.len() && b[j] < s {
            j += 1;
        }
        (j < b.len() && b[j] == s).then_some(s as usize)
    })
}

impl RootedSpanner {
    /// Root minimizing `d(u, r) + d(r, v)` over shared orderings.
    pub fn best_root(&self, u: usize, v: usize) -> Option<(usize, f64)> {
        let mut best: Option<(f64, usize)> = None;
        for s in shared(&self.member[u], &self.member[v]) {
            let r = self.roots[s];
            let w = self.dist.dist(u, r) + self.dist.dist(r, v);
            if best.is_none_or(|b| (w, r) < b) {
                best = Some((w, r));
            }
        }
        best.map(|(w, r)| (r, w))
    }
}

impl PathReporting for RootedSpanner {
    fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    fn stretch(&self) -> f64 {
        self.stretch
    }

    fn hops(&self) -> usize {
        2
    }

    fn path(&self, u: usize, v: usize) -> Result<Vec<usize>> {
        if u == v {
            return Ok(vec![u]);
        }
        let (r, _) = self.best_root(u, v).ok_or(Error::NoSharedOrdering)?;
        Ok(compact(vec![u, r, v]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lso::build_rooted_lso_tree;
    use crate::metric::{graph_metric, LpSpace, PointSet, WeightedGraph};
    use crate::spanners::check_path_reporting;

    #[test]
    fn two_points_single_edge() {
        let m = LpSpace::euclidean(PointSet::new(vec![vec![0.0], vec![1.0]]).unwrap());
        let fam = OrderingFamily::new(LsoKind::Triangle, 2, 1.0, vec![(None, vec![0, 1])]).unwrap();
        let s = pr_spanner_from_triangle(&fam, &m).unwrap();
        assert_eq!(s.edges().len(), 1);
        assert_eq!(s.path(0, 1).unwrap(), vec![0, 1]);
    }

    #[test]
    fn sorted_line_is_exact() {
        let m = LpSpace::euclidean(PointSet::new((0..17).map(|i| vec![(i * i) as f64]).collect()).unwrap());
        let fam = OrderingFamily::new(LsoKind::Classic, 17, 0.5, vec![(None, (0..17).collect())]).unwrap();
        let s = pr_spanner_from_classic(&fam, &m).unwrap();
        let r = check_path_reporting(&s, &m);
        assert!(r.passed());
        assert!((r.max_stretch - 1.0).abs() < 1e-12);
    }

    #[test]
    fn star_routes_through_hub() {
        let g = WeightedGraph::new(4, vec![(0, 1, 1.0), (0, 2, 2.0), (0, 3, 3.0)]).unwrap();
        let m = graph_metric(&g).unwrap();
        let fam = build_rooted_lso_tree(&g).unwrap();
        let s = pr_spanner_from_rooted(&fam, &m).unwrap();
        assert_eq!(s.path(1, 3).unwrap(), vec![1, 0, 3]);
        assert!(check_path_reporting(&s, &m).passed());
    }
}
