use std::collections::HashMap;

use rand::Rng as _;

use super::edges::{compact, EdgeSet, PathReporting};
use crate::error::{Error, Result};
use crate::metric::{DistanceMatrix, Metric};
use crate::rng::rng_for;

/// Sampling attempts before the bunch-size threshold is abandoned.
const MAX_TZ_ATTEMPTS: u64 = 64;

/// Thorup–Zwick distance oracle used as a 2-hop `(2k−1)`-spanner.
///
/// Level sets `A_0 = X ⊇ A_1 ⊇ … ⊇ A_k = ∅` keep each point of the previous
/// level with probability `n^{-1/k}`. The bunch of `v` is the union over `i`
/// of `{w ∈ A_i : d(v,w) < d(v, A_{i+1})}` and the spanner joins every point
/// to its bunch and its pivots.
#[derive(Debug, Clone)]
pub struct TzOracle {
    k: usize,
    /// `level[v]`: largest `i` with `v ∈ A_i`.
    level: Vec<usize>,
    /// `pivot[i][v]`: nearest point of `A_i` (ties by id), `None` when empty.
    pivot: Vec<Vec<Option<usize>>>,
    bunch: Vec<HashMap<usize, f64>>,
    dist: DistanceMatrix,
    edges: EdgeSet,
    attempts: u64,
}

/// Total bunch size threshold `4·k·n^{1+1/k}`.
pub fn tz_bunch_threshold(n: usize, k: usize) -> f64 {
    4.0 * k as f64 * (n as f64).powf(1.0 + 1.0 / k as f64)
}

fn sample_levels(n: usize, k: usize, seed: u64, attempt: u64) -> Vec<usize> {
    let mut rng = rng_for(seed, "tz-levels", attempt);
    let p = (n as f64).powf(-1.0 / k as f64);
    (0..n)
        .map(|_| {
            let mut l = 0;
            while l + 1 < k && rng.random::<f64>() < p {
                l += 1;
            }
            l
        })
        .collect()
}

pub fn tz_spanner<M: Metric + ?Sized>(m: &M, k: usize, seed: u64) -> Result<TzOracle> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if m.is_empty() {
        return Err(Error::Empty);
    }
    let n = m.len();
    let dist = DistanceMatrix::from_metric(m);
    let threshold = tz_bunch_threshold(n, k);
    let mut attempt = 0;
    loop {
        let level = sample_levels(n, k, seed, attempt);
        attempt += 1;
        if !level.contains(&(k - 1)) {
            // the walk needs a nonempty top level
            if attempt >= MAX_TZ_ATTEMPTS {
                return Err(Error::RetryCap(format!("top level empty after {attempt} samples")));
            }
            continue;
        }
        let (pivot, bunch) = bunches(&dist, &level, k);
        let total: usize = bunch.iter().map(HashMap::len).sum();
        if (total as f64) <= threshold || attempt >= MAX_TZ_ATTEMPTS {
            if (total as f64) > threshold {
                return Err(Error::RetryCap(format!(
                    "bunch size {total} above {threshold} after {attempt} samples"
                )));
            }
            let mut edges = EdgeSet::new(n);
            for v in 0..n {
                for &w in bunch[v].keys() {
                    edges.add(&dist, v, w);
                }
                for p in pivot.iter().filter_map(|row| row[v]) {
                    edges.add(&dist, v, p);
                }
            }
            return Ok(TzOracle {
                k,
                level,
                pivot,
                bunch,
                dist,
                edges,
                attempts: attempt,
            });
        }
    }
}

type Pivots = Vec<Vec<Option<usize>>>;

fn bunches(dist: &DistanceMatrix, level: &[usize], k: usize) -> (Pivots, Vec<HashMap<usize, f64>>) {
    let n = level.len();
    let mut pivot = vec![vec![None; n]; k + 1];
    for (i, row) in pivot.iter_mut().enumerate().take(k) {
        for (v, slot) in row.iter_mut().enumerate() {
            *slot = (0..n)
                .filter(|&w| level[w] >= i)
                .min_by(|&a, &b| dist.dist(v, a).total_cmp(&dist.dist(v, b)).then(a.cmp(&b)));
        }
    }
    let mut bunch = vec![HashMap::new(); n];
    for (v, b) in bunch.iter_mut().enumerate() {
        for w in 0..n {
            let i = level[w];
            // w ∈ A_i \ A_{i+1}; A_{i+1} is empty at the top level
            let bound = pivot[i + 1][v].map_or(f64::INFINITY, |p| dist.dist(v, p));
            let d = dist.dist(v, w);
            if d < bound {
                b.insert(w, d);
            }
        }
    }
    (pivot, bunch)
}

impl TzOracle {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of samplings needed to meet the bunch-size threshold.
    pub fn attempts(&self) -> u64 {
        self.attempts
    }

    /// Whether `v ∈ A_i`.
    pub fn in_level(&self, v: usize, i: usize) -> bool {
        i < self.k && self.level[v] >= i
    }

    pub fn pivot(&self, i: usize, v: usize) -> Option<usize> {
        self.pivot.get(i).and_then(|row| row[v])
    }

    pub fn bunch(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.bunch[v].keys().copied()
    }

    pub fn total_bunch_size(&self) -> usize {
        self.bunch.iter().map(HashMap::len).sum()
    }

    /// The query walk: returns the meeting point `w` and the number of
    /// iterations taken.
    pub fn query_walk(&self, u: usize, v: usize) -> (usize, usize) {
        let (mut u, mut v) = (u, v);
        let mut w = u;
        let mut i = 0;
        while !self.bunch[v].contains_key(&w) {
            i += 1;
            std::mem::swap(&mut u, &mut v);
            w = self.pivot[i][u].expect("top level lies in every bunch");
        }
        (w, i)
    }

    /// Distance estimate `d(u, w) + d(w, v)`, within `2k−1` of the truth.
    pub fn estimate(&self, u: usize, v: usize) -> f64 {
        let (w, _) = self.query_walk(u, v);
        self.dist.dist(u, w) + self.dist.dist(w, v)
    }
}

impl PathReporting for TzOracle {
    fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    fn stretch(&self) -> f64 {
        (2 * self.k - 1) as f64
    }

    fn hops(&self) -> usize {
        2
    }

    fn path(&self, u: usize, v: usize) -> Result<Vec<usize>> {
        if u == v {
            return Ok(vec![u]);
        }
        let (w, _) = self.query_walk(u, v);
        Ok(compact(vec![u, w, v]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spanners::check_path_reporting;

    #[test]
    fn k_one_is_complete() {
        let m = DistanceMatrix::from_rows(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.5], vec![2.0, 1.5, 0.0]]).unwrap();
        let o = tz_spanner(&m, 1, 3).unwrap();
        assert_eq!(o.edges().len(), 3);
        let r = check_path_reporting(&o, &m);
        assert!(r.passed());
        assert_eq!(r.max_stretch, 1.0);
    }

    #[test]
    fn uniform_metric_walk_is_short() {
        let n = 20;
        let m = DistanceMatrix::from_rows(
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
                .collect(),
        )
        .unwrap();
        let o = tz_spanner(&m, 3, 1).unwrap();
        for u in 0..n {
            for v in 0..n {
                assert!(o.query_walk(u, v).1 <= 2);
            }
        }
        assert!(check_path_reporting(&o, &m).passed());
    }
}
