use serde::Serialize;

use super::edges::{compact, EdgeSet, PathReporting};
use crate::error::{Error, Result};
use crate::metric::{distance_extent, DistanceMatrix, Metric, REL_TOL};

/// Largest number of scales a sparse cover spanner will build.
pub const MAX_SCALES: usize = 4096;

/// Sparse cover at one scale `Δ`: overlapping clusters of radius at most
/// `(2k−1)Δ` around their centers such that every `B(x, Δ)` lies inside the
/// home cluster of `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseCover {
    pub delta: f64,
    pub centers: Vec<usize>,
    /// Members of each cluster, ascending.
    pub clusters: Vec<Vec<usize>>,
    pub home: Vec<usize>,
}

impl SparseCover {
    /// Number of clusters containing each point.
    pub fn memberships(&self, n: usize) -> Vec<usize> {
        let mut c = vec![0; n];
        for cl in &self.clusters {
            for &x in cl {
                c[x] += 1;
            }
        }
        c
    }

    pub fn contains(&self, cluster: usize, x: usize) -> bool {
        self.clusters[cluster].binary_search(&x).is_ok()
    }

    /// Exhaustive check of the radius bound and of home-cluster padding.
    pub fn verify<M: Metric + ?Sized>(&self, m: &M, k: usize) -> Result<()> {
        let radius = (2 * k - 1) as f64 * self.delta;
        for (c, cl) in self.clusters.iter().enumerate() {
            for &x in cl {
                if m.dist(self.centers[c], x) > radius * (1.0 + REL_TOL) {
                    return Err(Error::DiameterViolation {
                        level: 0,
                        cluster: c,
                        diameter: m.dist(self.centers[c], x),
                        bound: radius,
                    });
                }
            }
        }
        for x in 0..m.len() {
            for y in 0..m.len() {
                if m.dist(x, y) <= self.delta && !self.contains(self.home[x], y) {
                    return Err(Error::PaddingFailed {
                        point: x,
                        radius: self.delta,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Region growing around uncovered points in id order. From `x`, the radius
/// `r` grows in steps of `Δ` while the uncovered points within `r + Δ`
/// outnumber those within `r` by more than `n^{1/k}`; this happens at most
/// `k − 1` times. The cluster is all of `B(x, r + Δ)` and the uncovered points
/// of `B(x, r)` take it as their home, so its radius is at most `kΔ`.
pub fn build_sparse_cover<M: Metric + ?Sized>(m: &M, k: usize, delta: f64) -> SparseCover {
    let n = m.len();
    let growth = (n as f64).powf(1.0 / k as f64);
    let mut open = vec![true; n];
    let mut home = vec![usize::MAX; n];
    let mut centers = Vec::new();
    let mut clusters = Vec::new();
    for x in 0..n {
        if !open[x] {
            continue;
        }
        let within = |r: f64| (0..n).filter(|&y| open[y] && m.dist(x, y) <= r).count();
        let mut r = 0.0;
        while within(r + delta) as f64 > growth * within(r) as f64 {
            r += delta;
        }
        let id = clusters.len();
        for y in 0..n {
            if open[y] && m.dist(x, y) <= r {
                open[y] = false;
                home[y] = id;
            }
        }
        centers.push(x);
        clusters.push((0..n).filter(|&y| m.dist(x, y) <= r + delta).collect());
    }
    SparseCover {
        delta,
        centers,
        clusters,
        home,
    }
}

/// 2-hop `(1+ε)(4k−2)`-spanner from sparse covers at scales
/// `Δ_i = u·(1+ε)^i`, `u` the smallest distance. Every point is joined to
/// the centers of its clusters. A query asks the estimator for `est` with
/// `d ≤ est ≤ (2k−1)·d`, scans scales `⌊log_{1+ε}(est/(2k−1))⌋ … ⌈log_{1+ε} est⌉+1`
/// and returns the lightest path through a center of `u`'s home cluster
/// that also contains `v`.
pub struct SparseCoverSpanner<'a> {
    k: usize,
    eps: f64,
    unit: f64,
    covers: Vec<SparseCover>,
    dist: DistanceMatrix,
    edges: EdgeSet,
    estimator: Box<dyn Fn(usize, usize) -> f64 + 'a>,
}

pub fn sparse_cover_spanner<'a, M, E>(m: &M, k: usize, eps: f64, estimator: E) -> Result<SparseCoverSpanner<'a>>
where
    M: Metric + ?Sized,
    E: Fn(usize, usize) -> f64 + 'a,
{
    if k == 0 || !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("need k≥1 and ε>0, got k={k}, ε={eps}")));
    }
    let n = m.len();
    let dist = DistanceMatrix::from_metric(m);
    let (unit, diameter) = distance_extent(m).unwrap_or((1.0, 1.0));
    let scales = ((diameter / unit).ln() / (1.0 + eps).ln()).ceil() as usize + 2;
    if scales > MAX_SCALES {
        return Err(Error::InvalidParameter(format!(
            "aspect ratio needs {scales} scales, above the limit {MAX_SCALES}"
        )));
    }
    let mut edges = EdgeSet::new(n);
    let mut covers = Vec::with_capacity(scales);
    for i in 0..scales {
        let cover = build_sparse_cover(&dist, k, unit * (1.0 + eps).powi(i as i32));
        for (c, cl) in cover.clusters.iter().enumerate() {
            for &x in cl {
                edges.add(&dist, x, cover.centers[c]);
            }
        }
        covers.push(cover);
    }
    Ok(SparseCoverSpanner {
        k,
        eps,
        unit,
        covers,
        dist,
        edges,
        estimator: Box::new(estimator),
    })
}

impl SparseCoverSpanner<'_> {
    pub fn covers(&self) -> &[SparseCover] {
        &self.covers
    }

    /// Scale indices inspected for a pair with estimate `est`.
    pub fn scale_window(&self, est: f64) -> std::ops::RangeInclusive<usize> {
        let base = (1.0 + self.eps).ln();
        let lo = ((est / (2 * self.k - 1) as f64 / self.unit).ln() / base)
            .floor()
            .max(0.0) as usize;
        let hi = (((est / self.unit).ln() / base).ceil() + 1.0).max(0.0) as usize;
        lo.min(self.covers.len() - 1)..=hi.min(self.covers.len() - 1)
    }

    /// Path and the number of scales scanned.
    pub fn path_with_scans(&self, u: usize, v: usize) -> Result<(Vec<usize>, usize)> {
        if u == v {
            return Ok((vec![u], 0));
        }
        let window = self.scale_window((self.estimator)(u, v));
        let scans = window.clone().count();
        let mut best: Option<(f64, usize)> = None;
        for i in window {
            let cover = &self.covers[i];
            let h = cover.home[u];
            if cover.contains(h, v) {
                let c = cover.centers[h];
                let w = self.dist.dist(u, c) + self.dist.dist(c, v);
                if best.is_none_or(|b| (w, c) < b) {
                    best = Some((w, c));
                }
            }
        }
        let (_, c) = best.ok_or(Error::EstimatorFault { u, v })?;
        Ok((compact(vec![u, c, v]), scans))
    }
}

impl PathReporting for SparseCoverSpanner<'_> {
    fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    fn stretch(&self) -> f64 {
        (1.0 + self.eps) * (4 * self.k - 2) as f64
    }

    fn hops(&self) -> usize {
        2
    }

    fn path(&self, u: usize, v: usize) -> Result<Vec<usize>> {
        self.path_with_scans(u, v).map(|p| p.0)
    }
}
