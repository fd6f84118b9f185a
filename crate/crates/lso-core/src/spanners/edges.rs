use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{stretch_ratio, Metric, WeightedGraph, REL_TOL};

/// Undirected edges keyed by `(min, max)` endpoint, weights equal to metric
/// distances.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeSet {
    n: usize,
    edges: BTreeMap<(usize, usize), f64>,
}

impl EdgeSet {
    pub fn new(n: usize) -> Self {
        EdgeSet {
            n,
            edges: BTreeMap::new(),
        }
    }

    pub fn points(&self) -> usize {
        self.n
    }

    /// Adds `{u, v}` with weight `d(u, v)`; self-loops are ignored.
    pub fn add<M: Metric + ?Sized>(&mut self, m: &M, u: usize, v: usize) {
        if u != v {
            let key = (u.min(v), u.max(v));
            self.edges.entry(key).or_insert_with(|| m.dist(u, v));
        }
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.edges.contains_key(&(u.min(v), u.max(v)))
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.edges.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(u, v), &w)| (u, v, w))
    }

    /// Graph on all `n` points; isolated points are allowed.
    pub fn to_graph(&self) -> Adjacency {
        let mut adj = vec![Vec::new(); self.n];
        for (u, v, w) in self.iter() {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        Adjacency { adj }
    }

    /// Converts to a validated [`WeightedGraph`]; zero-weight edges are
    /// dropped.
    pub fn to_weighted_graph(&self) -> Result<WeightedGraph> {
        WeightedGraph::new(self.n, self.iter().filter(|e| e.2 > 0.0).collect())
    }
}

/// Plain adjacency lists used for shortest paths over spanner edges,
/// possibly disconnected.
#[derive(Debug, Clone)]
pub struct Adjacency {
    adj: Vec<Vec<(usize, f64)>>,
}

impl Adjacency {
    /// Single-source distances avoiding `blocked` vertices (the source is
    /// never blocked). Unreachable vertices get `∞`.
    pub fn distances(&self, source: usize, blocked: &[bool]) -> Vec<f64> {
        use std::collections::BinaryHeap;
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(crate::metric::HeapItem { d: 0.0, v: source });
        while let Some(crate::metric::HeapItem { d, v }) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(u, w) in &self.adj[v] {
                if blocked.get(u).copied().unwrap_or(false) {
                    continue;
                }
                let nd = d + w;
                if nd < dist[u] {
                    dist[u] = nd;
                    heap.push(crate::metric::HeapItem { d: nd, v: u });
                }
            }
        }
        dist
    }
}

/// A spanner with a query structure returning explicit short paths.
pub trait PathReporting {
    fn edges(&self) -> &EdgeSet;
    /// Declared stretch bound.
    fn stretch(&self) -> f64;
    /// Declared bound on the number of edges of a reported path.
    fn hops(&self) -> usize;
    /// Path from `u` to `v` as a vertex sequence starting at `u` and ending
    /// at `v`.
    fn path(&self, u: usize, v: usize) -> Result<Vec<usize>>;

    fn to_json(&self) -> String {
        let edges: Vec<(usize, usize, f64)> = self.edges().iter().collect();
        serde_json::json!({ "stretch": self.stretch(), "hops": self.hops(), "edges": edges }).to_string()
    }
}

/// Weight of `path` using spanner edges, or an error if a hop is missing.
pub fn path_weight(edges: &EdgeSet, path: &[usize]) -> Result<f64> {
    let mut w = 0.0;
    for pair in path.windows(2) {
        w += edges
            .weight(pair[0], pair[1])
            .ok_or_else(|| Error::NoPath(format!("edge {{{}, {}}} not in the spanner", pair[0], pair[1])))?;
    }
    Ok(w)
}

/// Collapses repeated consecutive vertices.
pub(crate) fn compact(mut path: Vec<usize>) -> Vec<usize> {
    path.dedup();
    path
}

/// Outcome of an all-pairs check of a path-reporting spanner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpannerReport {
    pub pairs_checked: usize,
    pub edges: usize,
    pub total_weight: f64,
    pub stretch: f64,
    pub hops: usize,
    pub max_stretch: f64,
    pub max_hops: usize,
    /// Pairs whose reported path is invalid, too long, or too heavy (≤ 64 kept).
    pub violations: Vec<(usize, usize, f64)>,
    pub violation_count: usize,
}

impl SpannerReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

/// Queries every pair and checks that each path uses spanner edges, has at
/// most `hops` edges, and weighs at most `stretch · d(u, v)`. Also checks
/// that every edge weight equals the metric distance.
pub fn check_path_reporting<S, M>(s: &S, m: &M) -> SpannerReport
where
    S: PathReporting + ?Sized,
    M: Metric + ?Sized,
{
    let n = m.len();
    let mut r = SpannerReport {
        pairs_checked: 0,
        edges: s.edges().len(),
        total_weight: s.edges().total_weight(),
        stretch: s.stretch(),
        hops: s.hops(),
        max_stretch: 0.0,
        max_hops: 0,
        violations: Vec::new(),
        violation_count: 0,
    };
    let flag = |r: &mut SpannerReport, u, v, x| {
        r.violation_count += 1;
        if r.violations.len() < 64 {
            r.violations.push((u, v, x));
        }
    };
    for (u, v, w) in s.edges().iter() {
        if (w - m.dist(u, v)).abs() > REL_TOL * w.max(1.0) {
            flag(&mut r, u, v, w);
        }
    }
    for u in 0..n {
        for v in (u + 1)..n {
            r.pairs_checked += 1;
            let checked = s.path(u, v).and_then(|p| {
                if p.first() != Some(&u) || p.last() != Some(&v) {
                    return Err(Error::NoPath(format!("path does not join {u} and {v}")));
                }
                Ok((path_weight(s.edges(), &p)?, p.len() - 1))
            });
            match checked {
                Ok((w, h)) => {
                    let ratio = stretch_ratio(w, m.dist(u, v));
                    r.max_stretch = r.max_stretch.max(ratio);
                    r.max_hops = r.max_hops.max(h);
                    if h > s.hops() || ratio > s.stretch() * (1.0 + REL_TOL) {
                        flag(&mut r, u, v, ratio);
                    }
                }
                Err(_) => flag(&mut r, u, v, f64::INFINITY),
            }
        }
    }
    r
}

/// Largest `d_H(u, v) / d(u, v)` over pairs of surviving points, with
/// shortest paths in the spanner avoiding `faults`.
pub fn graph_stretch<M: Metric + ?Sized>(edges: &EdgeSet, m: &M, faults: &[usize]) -> f64 {
    let g = edges.to_graph();
    let n = m.len();
    let mut blocked = vec![false; n];
    for &f in faults {
        blocked[f] = true;
    }
    let mut worst = 0.0f64;
    for u in (0..n).filter(|&u| !blocked[u]) {
        let d = g.distances(u, &blocked);
        for v in (u + 1)..n {
            if !blocked[v] {
                worst = worst.max(stretch_ratio(d[v], m.dist(u, v)));
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{LpSpace, PointSet};

    #[test]
    fn edges_dedup_and_weigh() {
        let m = LpSpace::euclidean(PointSet::new(vec![vec![0.0], vec![2.0], vec![5.0]]).unwrap());
        let mut e = EdgeSet::new(3);
        e.add(&m, 1, 0);
        e.add(&m, 0, 1);
        e.add(&m, 2, 2);
        assert_eq!(e.len(), 1);
        assert_eq!(e.weight(0, 1), Some(2.0));
        assert!(path_weight(&e, &[0, 1, 2]).is_err());
        e.add(&m, 1, 2);
        assert_eq!(graph_stretch(&e, &m, &[]), 1.0);
        assert!(graph_stretch(&e, &m, &[1]).is_infinite());
    }
}
