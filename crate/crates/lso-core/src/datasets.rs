//! Deterministic synthetic inputs.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::lso::TreeDecomposition;
use crate::metric::{DistanceMatrix, PointSet, WeightedGraph};
use crate::rng::rng_for;

/// `n` points uniform in `[0,1]^d`.
pub fn uniform_cube(n: usize, d: usize, seed: u64) -> Result<PointSet> {
    check(n, d)?;
    let mut rng = rng_for(seed, "uniform-cube", 0);
    PointSet::new((0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect())
}

/// `n` points around `⌈√n / 2⌉` centers drawn uniformly in `[0,1]^d`, with
/// Gaussian noise of standard deviation 0.05 per coordinate.
pub fn gaussian_clusters(n: usize, d: usize, seed: u64) -> Result<PointSet> {
    check(n, d)?;
    let mut rng = rng_for(seed, "gaussian-clusters", 0);
    let k = ((n as f64).sqrt() / 2.0).ceil().max(1.0) as usize;
    let centers: Vec<Vec<f64>> = (0..k).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
    let noise = Normal::new(0.0, 0.05).expect("valid deviation");
    PointSet::new(
        (0..n)
            .map(|i| centers[i % k].iter().map(|&c| c + noise.sample(&mut rng)).collect())
            .collect(),
    )
}

/// The first `n` points, in lexicographic order, of the integer grid with
/// side `⌈n^{1/d}⌉`.
pub fn grid_points(n: usize, d: usize) -> Result<PointSet> {
    check(n, d)?;
    let mut side = (n as f64).powf(1.0 / d as f64).round().max(1.0) as usize;
    while side.pow(d as u32) < n {
        side += 1;
    }
    PointSet::new(
        (0..n)
            .map(|mut i| {
                let mut p = vec![0.0; d];
                for c in p.iter_mut().rev() {
                    *c = (i % side) as f64;
                    i /= side;
                }
                p
            })
            .collect(),
    )
}

/// Random metric on `n` points: independent weights uniform in `[1, 10)` on
/// every pair, closed under shortest paths.
pub fn random_metric(n: usize, seed: u64) -> Result<DistanceMatrix> {
    check(n, 1)?;
    let mut rng = rng_for(seed, "random-metric", 0);
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.random_range(1.0..10.0);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    DistanceMatrix::from_rows(d)
}

/// Random recursive tree: vertex `i ≥ 1` hangs from a uniform earlier vertex
/// with an integer weight in `1..=10`.
pub fn random_tree(n: usize, seed: u64) -> Result<WeightedGraph> {
    check(n, 1)?;
    let mut rng = rng_for(seed, "random-tree", 0);
    let edges = (1..n)
        .map(|i| (rng.random_range(0..i), i, rng.random_range(1..=10) as f64))
        .collect();
    WeightedGraph::new(n, edges)
}

/// Connected random graph: a random tree plus `extra` random chords, integer
/// weights in `1..=10`. Repeated chords and self pairs are skipped.
pub fn random_graph(n: usize, extra: usize, seed: u64) -> Result<WeightedGraph> {
    let tree = random_tree(n, seed)?;
    let mut edges = tree.edges().to_vec();
    let mut rng = rng_for(seed, "random-graph", 0);
    let mut seen: std::collections::HashSet<(usize, usize)> =
        edges.iter().map(|e| (e.0.min(e.1), e.0.max(e.1))).collect();
    if n >= 2 {
        for _ in 0..extra {
            let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
            if u != v && seen.insert((u.min(v), u.max(v))) {
                edges.push((u, v, rng.random_range(1..=10) as f64));
            }
        }
    }
    WeightedGraph::new(n, edges)
}

/// `rows × cols` grid graph with unit weights, vertices in row-major order,
/// together with its path decomposition of width `cols` whose bags are the
/// windows of `cols + 1` consecutive vertices.
pub fn grid_graph(rows: usize, cols: usize) -> Result<(WeightedGraph, TreeDecomposition)> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter("grid sides must be positive".into()));
    }
    let n = rows * cols;
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1), 1.0));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c), 1.0));
            }
        }
    }
    let g = WeightedGraph::new(n, edges)?;
    let bags: Vec<Vec<usize>> = if n <= cols + 1 {
        vec![(0..n).collect()]
    } else {
        (0..n - cols).map(|i| (i..=i + cols).collect()).collect()
    };
    let bag_edges = (1..bags.len()).map(|b| (b - 1, b)).collect();
    Ok((
        g,
        TreeDecomposition {
            n,
            bags,
            edges: bag_edges,
        },
    ))
}

fn check(n: usize, d: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{check_metric_axioms, Metric};

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(uniform_cube(10, 3, 4).unwrap(), uniform_cube(10, 3, 4).unwrap());
        assert_ne!(uniform_cube(10, 3, 4).unwrap(), uniform_cube(10, 3, 5).unwrap());
        assert_eq!(random_tree(5, 1).unwrap(), random_tree(5, 1).unwrap());
    }

    #[test]
    fn random_metric_is_a_metric() {
        let m = random_metric(30, 2).unwrap();
        assert!(check_metric_axioms(&m, 30 * 30 * 30, 0).is_ok());
        assert!(m.dist(0, 1) >= 1.0);
    }

    #[test]
    fn grid_decomposition_is_valid() {
        let (g, td) = grid_graph(5, 4).unwrap();
        td.validate(&g).unwrap();
        assert_eq!(td.width(), 4);
        let pts = grid_points(9, 2).unwrap();
        assert_eq!(pts.point(8), &[2.0, 2.0]);
    }

    #[test]
    fn random_graph_is_connected() {
        let g = random_graph(40, 40, 3).unwrap();
        assert!(g.dijkstra(0, None).iter().all(|d| d.is_finite()));
        assert!(g.edges().len() > 39);
    }
}
