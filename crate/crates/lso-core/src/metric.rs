//! Finite metric spaces: point sets under ℓp norms, weighted graphs and
//! explicit distance matrices.

use std::cmp::Ordering as CmpOrdering;
use std::collections::BinaryHeap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_for;

/// Relative tolerance used by every stretch comparison on floating inputs.
pub const REL_TOL: f64 = 1e-9;

/// An ℓp norm with `p >= 1`, or ℓ∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Norm {
    L(f64),
    Inf,
}

impl Norm {
    pub fn euclidean() -> Self {
        Norm::L(2.0)
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            Norm::L(p) if !(p >= 1.0) || !p.is_finite() => Err(Error::InvalidNorm(p)),
            _ => Ok(self),
        }
    }

    /// The exponent, `f64::INFINITY` for ℓ∞.
    pub fn p(self) -> f64 {
        match self {
            Norm::L(p) => p,
            Norm::Inf => f64::INFINITY,
        }
    }

    pub fn is_euclidean(self) -> bool {
        matches!(self, Norm::L(p) if p == 2.0)
    }

    /// Norm of a vector.
    pub fn length(self, v: &[f64]) -> f64 {
        match self {
            Norm::Inf => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            Norm::L(p) if p == 2.0 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::L(p) if p == 1.0 => v.iter().map(|x| x.abs()).sum(),
            Norm::L(p) => v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }

    /// Distance between two vectors of equal length (unchecked).
    pub fn dist(self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Norm::Inf => x.iter().zip(y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())),
            Norm::L(p) if p == 2.0 => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            Norm::L(p) if p == 1.0 => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            Norm::L(p) => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b).abs().powf(p))
                .sum::<f64>()
                .powf(1.0 / p),
        }
    }
}

/// ℓp distance between two points.
pub fn lp_distance(x: &[f64], y: &[f64], norm: Norm) -> Result<f64> {
    norm.validate()?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(norm.dist(x, y))
}

/// A set of points in R^d, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).ok_or(Error::Empty)?;
        if dim == 0 {
            return Err(Error::InvalidParameter("points have dimension 0".into()));
        }
        let mut coords = Vec::with_capacity(dim * points.len());
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite { point: i });
            }
            coords.extend_from_slice(p);
        }
        Ok(PointSet { dim, coords })
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() {
            return Err(Error::Empty);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len() % dim,
            });
        }
        if let Some(k) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { point: k / dim });
        }
        Ok(PointSet { dim, coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Returns the subset with the given ids, in the given order.
    pub fn subset(&self, ids: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(ids.len() * self.dim);
        for &i in ids {
            coords.extend_from_slice(self.point(i));
        }
        PointSet { dim: self.dim, coords }
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> PointSet {
        PointSet {
            dim: self.dim,
            coords: self.coords.iter().map(|c| c * factor).collect(),
        }
    }
}

/// What kind of space a metric comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MetricKind {
    Lp(f64),
    Graph,
    Ultrametric,
    Explicit,
}

/// A finite metric on points `0..len()`.
pub trait Metric {
    fn len(&self) -> usize;
    fn dist(&self, i: usize, j: usize) -> f64;
    fn kind(&self) -> MetricKind;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<M: Metric + ?Sized> Metric for &M {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        (**self).dist(i, j)
    }
    fn kind(&self) -> MetricKind {
        (**self).kind()
    }
}

/// A point set under an ℓp norm.
#[derive(Debug, Clone)]
pub struct LpSpace {
    pub points: PointSet,
    pub norm: Norm,
}

impl LpSpace {
    pub fn new(points: PointSet, norm: Norm) -> Result<Self> {
        Ok(LpSpace {
            points,
            norm: norm.validate()?,
        })
    }

    pub fn euclidean(points: PointSet) -> Self {
        LpSpace {
            points,
            norm: Norm::euclidean(),
        }
    }
}

impl Metric for LpSpace {
    fn len(&self) -> usize {
        self.points.len()
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.norm.dist(self.points.point(i), self.points.point(j))
    }
    fn kind(&self) -> MetricKind {
        MetricKind::Lp(self.norm.p())
    }
}

/// A dense symmetric distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
    kind: MetricKind,
}

impl DistanceMatrix {
    /// Builds a matrix from rows; checks shape, symmetry, zero diagonal and
    /// non-negativity.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
            if r.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::NonFinite { point: i });
            }
            data.extend_from_slice(r);
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::InvalidParameter(format!("asymmetric entry ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix {
            n,
            data,
            kind: MetricKind::Explicit,
        })
    }

    /// Tabulates any metric.
    pub fn from_metric<M: Metric + ?Sized>(m: &M) -> Self {
        let n = m.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = m.dist(i, j);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        DistanceMatrix {
            n,
            data,
            kind: m.kind(),
        }
    }

    pub fn with_kind(mut self, kind: MetricKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }
}

impl Metric for DistanceMatrix {
    fn len(&self) -> usize {
        self.n
    }
    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
    fn kind(&self) -> MetricKind {
        self.kind
    }
}

/// An undirected graph with positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    adj: Vec<Vec<(usize, f64)>>,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in &edges {
            if u >= n || v >= n {
                return Err(Error::OutOfRange {
                    index: u.max(v),
                    size: n,
                });
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self loop at {u}")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidGraph(format!("non-positive weight on ({u}, {v})")));
            }
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        Ok(WeightedGraph { n, adj, edges })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].iter().any(|&(x, _)| x == v)
    }

    /// Single-source shortest paths restricted to vertices with `allowed[v]`
    /// (all vertices when `allowed` is `None`). Unreachable vertices get
    /// `f64::INFINITY`.
    pub fn dijkstra(&self, source: usize, allowed: Option<&[bool]>) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.n];
        let ok = |v: usize| allowed.is_none_or(|a| a[v]);
        if !ok(source) {
            return dist;
        }
        dist[source] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(HeapItem { d: 0.0, v: source });
        while let Some(HeapItem { d, v }) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(u, w) in &self.adj[v] {
                if !ok(u) {
                    continue;
                }
                let nd = d + w;
                if nd < dist[u] {
                    dist[u] = nd;
                    heap.push(HeapItem { d: nd, v: u });
                }
            }
        }
        dist
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct HeapItem {
    pub d: f64,
    pub v: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == CmpOrdering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<CmpOrdering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    // min-heap on (d, v)
    fn cmp(&self, other: &Self) -> CmpOrdering {
        other.d.total_cmp(&self.d).then_with(|| other.v.cmp(&self.v))
    }
}

/// Shortest-path distances from each source. Fails if some vertex is not
/// reachable from a source.
pub fn graph_distances(g: &WeightedGraph, sources: &[usize]) -> Result<Vec<Vec<f64>>> {
    sources
        .iter()
        .map(|&s| {
            if s >= g.len() {
                return Err(Error::OutOfRange {
                    index: s,
                    size: g.len(),
                });
            }
            let d = g.dijkstra(s, None);
            if let Some(v) = d.iter().position(|x| x.is_infinite()) {
                return Err(Error::Disconnected { vertex: v });
            }
            Ok(d)
        })
        .collect()
}

/// The shortest-path metric of a connected graph, tabulated.
pub fn graph_metric(g: &WeightedGraph) -> Result<DistanceMatrix> {
    let all: Vec<usize> = (0..g.len()).collect();
    let rows = graph_distances(g, &all)?;
    let n = g.len();
    let mut data = Vec::with_capacity(n * n);
    for r in rows {
        data.extend(r);
    }
    Ok(DistanceMatrix {
        n,
        data,
        kind: MetricKind::Graph,
    })
}

/// Greedy ε-net in ascending id order: pairwise distances are ≥ `r` and every
/// point lies within distance `< r` of some net point.
pub fn build_epsilon_net<M: Metric + ?Sized>(m: &M, r: f64) -> Result<Vec<usize>> {
    if m.is_empty() {
        return Err(Error::Empty);
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("net radius {r} must be positive")));
    }
    let mut net: Vec<usize> = Vec::new();
    for x in 0..m.len() {
        if net.iter().all(|&c| m.dist(x, c) >= r) {
            net.push(x);
        }
    }
    Ok(net)
}

/// Smallest and largest positive pairwise distance.
pub fn distance_extent<M: Metric + ?Sized>(m: &M) -> Option<(f64, f64)> {
    let n = m.len();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = m.dist(i, j);
            if d > 0.0 {
                lo = lo.min(d);
                hi = hi.max(d);
            }
        }
    }
    (hi > 0.0).then_some((lo, hi))
}

/// Max over min positive pairwise distance.
pub fn aspect_ratio<M: Metric + ?Sized>(m: &M) -> Result<f64> {
    if m.len() < 2 {
        return Err(Error::InvalidParameter("aspect ratio needs at least two points".into()));
    }
    let (lo, hi) = distance_extent(m).ok_or(Error::Degenerate)?;
    Ok(hi / lo)
}

/// A violated metric axiom.
#[derive(Debug, Clone, PartialEq)]
pub enum AxiomViolation {
    Negative(usize, usize),
    NonzeroSelf(usize),
    Asymmetric(usize, usize),
    Triangle(usize, usize, usize),
}

/// Checks non-negativity, symmetry, zero self-distance and the triangle
/// inequality on `samples` random triples (all triples when `n^3` is smaller).
pub fn check_metric_axioms<M: Metric + ?Sized>(
    m: &M,
    samples: usize,
    seed: u64,
) -> std::result::Result<(), AxiomViolation> {
    let n = m.len();
    let check = |a: usize, b: usize, c: usize| -> std::result::Result<(), AxiomViolation> {
        let ab = m.dist(a, b);
        if ab < 0.0 {
            return Err(AxiomViolation::Negative(a, b));
        }
        if a == b && ab != 0.0 {
            return Err(AxiomViolation::NonzeroSelf(a));
        }
        if ab != m.dist(b, a) {
            return Err(AxiomViolation::Asymmetric(a, b));
        }
        if ab > (m.dist(a, c) + m.dist(c, b)) * (1.0 + REL_TOL) {
            return Err(AxiomViolation::Triangle(a, b, c));
        }
        Ok(())
    };
    if n == 0 {
        return Ok(());
    }
    if (n as u128).pow(3) <= samples as u128 {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    check(a, b, c)?;
                }
            }
        }
    } else {
        let mut rng = rng_for(seed, "axioms", 0);
        for _ in 0..samples {
            check(rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n))?;
        }
    }
    Ok(())
}

/// Ratio `num / den` with the conventions used by all stretch checks:
/// a zero denominator yields 0 when the numerator is 0 and infinity otherwise.
#[inline]
pub fn stretch_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num <= 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `value <= bound` up to the relative tolerance.
#[inline]
pub fn within(value: f64, bound: f64) -> bool {
    value <= bound * (1.0 + REL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_distance_examples() {
        let d = lp_distance(&[0.0, 0.0], &[3.0, 4.0], Norm::L(2.0)).unwrap();
        assert_eq!(d, 5.0);
        assert_eq!(lp_distance(&[0.0, 0.0], &[3.0, 4.0], Norm::L(1.0)).unwrap(), 7.0);
        assert_eq!(lp_distance(&[0.0, 0.0], &[3.0, 4.0], Norm::Inf).unwrap(), 4.0);
        assert!(matches!(
            lp_distance(&[0.0], &[1.0, 2.0], Norm::L(2.0)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            lp_distance(&[0.0], &[1.0], Norm::L(0.5)),
            Err(Error::InvalidNorm(_))
        ));
    }

    #[test]
    fn point_set_rejects_bad_input() {
        assert!(matches!(
            PointSet::new(vec![vec![0.0, 1.0], vec![f64::NAN, 0.0]]),
            Err(Error::NonFinite { point: 1 })
        ));
        assert!(matches!(
            PointSet::new(vec![vec![0.0, 1.0], vec![0.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(PointSet::new(vec![]), Err(Error::Empty)));
    }

    #[test]
    fn path_graph_distances() {
        let g = WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let d = graph_distances(&g, &[0]).unwrap();
        assert_eq!(d[0], vec![0.0, 1.0, 3.0]);
    }

    #[test]
    fn disconnected_graph_is_reported() {
        let g = WeightedGraph::new(3, vec![(0, 1, 1.0)]).unwrap();
        assert_eq!(graph_distances(&g, &[0]), Err(Error::Disconnected { vertex: 2 }));
    }

    #[test]
    fn net_of_two_points() {
        let ps = PointSet::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let m = LpSpace::euclidean(ps);
        assert_eq!(build_epsilon_net(&m, 2.0).unwrap(), vec![0]);
        assert_eq!(build_epsilon_net(&m, 1.0).unwrap(), vec![0, 1]);
    }

    #[test]
    fn aspect_ratio_errors_on_coincident_points() {
        let ps = PointSet::new(vec![vec![1.0], vec![1.0]]).unwrap();
        assert_eq!(aspect_ratio(&LpSpace::euclidean(ps)), Err(Error::Degenerate));
        let ps = PointSet::new(vec![vec![0.0], vec![1.0], vec![4.0]]).unwrap();
        assert_eq!(aspect_ratio(&LpSpace::euclidean(ps)).unwrap(), 4.0);
    }

    #[test]
    fn axioms_catch_triangle_violation() {
        let m = DistanceMatrix::from_rows(vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]]).unwrap();
        assert!(matches!(
            check_metric_axioms(&m, 1000, 0),
            Err(AxiomViolation::Triangle(..))
        ));
    }
}
