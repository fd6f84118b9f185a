use serde::Serialize;

use super::cover::{build_padded_partition_cover, PaddedPartitionCover, Partition};
use super::laminar::{hierarchy_to_hst, laminarize};
use crate::error::{Error, Result};
use crate::hst::Hst;
use crate::lso::{LsoKind, OrderingFamily};
use crate::metric::{distance_extent, stretch_ratio, Metric, REL_TOL};
use crate::rng::derive_seed;

/// Dominating ultrametrics over one point set whose pointwise minimum
/// approximates the metric within `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct UltrametricCover {
    pub hsts: Vec<Hst>,
    /// Target stretch.
    pub rho: f64,
    /// Padding factor used for the underlying partition covers.
    pub padding: f64,
    /// Smallest positive distance of the input; scales are multiples of it.
    pub unit: f64,
}

impl UltrametricCover {
    pub fn len(&self) -> usize {
        self.hsts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hsts.is_empty()
    }

    /// `min` over the HSTs of `d_U(x, y)`.
    pub fn min_dist(&self, x: usize, y: usize) -> f64 {
        self.hsts.iter().map(|h| h.dist(x, y)).fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> String {
        let hsts: Vec<serde_json::Value> = self
            .hsts
            .iter()
            .map(|h| serde_json::from_str(&h.to_json()).expect("valid HST JSON"))
            .collect();
        serde_json::json!({ "rho": self.rho, "hsts": hsts }).to_string()
    }
}

/// Result of checking a cover against the base metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverReport {
    pub pairs_checked: usize,
    /// Pairs where some HST is shorter than the metric.
    pub domination_failures: usize,
    /// Largest `min_U d_U(x,y) / d(x,y)`.
    pub max_stretch: f64,
    pub rho: f64,
}

impl CoverReport {
    pub fn passed(&self) -> bool {
        self.domination_failures == 0 && self.max_stretch <= self.rho * (1.0 + REL_TOL)
    }
}

/// Exhaustive check of domination and stretch.
pub fn verify_ultrametric_cover<M: Metric + ?Sized>(cover: &UltrametricCover, m: &M) -> CoverReport {
    let n = m.len();
    let mut report = CoverReport {
        pairs_checked: 0,
        domination_failures: 0,
        max_stretch: 0.0,
        rho: cover.rho,
    };
    for x in 0..n {
        for y in (x + 1)..n {
            let d = m.dist(x, y);
            report.pairs_checked += 1;
            if cover.hsts.iter().any(|h| h.dist(x, y) < d) {
                report.domination_failures += 1;
            }
            report.max_stretch = report.max_stretch.max(stretch_ratio(cover.min_dist(x, y), d));
        }
    }
    report
}

/// Padding factor that makes the cover's worst-case stretch at most `t`:
/// a pair at distance `D` is co-clustered at the first scale `Δ` with
/// `Δ/ρ − (1+ε)Δ·ε/(4ρ) ≥ D`, and consecutive usable scales differ by
/// `1+ε`, so the stretch is at most `(1+ε)²ρ / (1 − (1+ε)ε/4)`. Never
/// below 2, the best a radius-`Δ/2` carving can pad.
pub fn cover_padding(t: f64, eps: f64) -> f64 {
    (t * (1.0 - (1.0 + eps) * eps / 4.0) / ((1.0 + eps) * (1.0 + eps))).max(2.0)
}

/// Ultrametric cover with target stretch `t`.
///
/// Scales are `Δ_i = c·u·(4ρ/ε)^i` for the smallest distance `u`, shifts
/// `c = (1+ε)^l`, `l ∈ [0, ⌊log_{1+ε}(4ρ/ε)⌋]`, and levels from below `u`
/// up to the diameter. Every (shift, cover index) pair yields one HST from
/// the laminarized chain of that index's partitions, where a scale with
/// fewer partitions reuses them cyclically.
pub fn build_ultrametric_cover<M: Metric + ?Sized>(m: &M, t: f64, eps: f64, seed: u64) -> Result<UltrametricCover> {
    if m.is_empty() {
        return Err(Error::Empty);
    }
    if !(eps > 0.0 && eps <= 0.25) || !(t >= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "need ε∈(0,1/4] and t≥2, got ε={eps}, t={t}"
        )));
    }
    let n = m.len();
    let rho = cover_padding(t, eps);
    let Some((unit, diameter)) = distance_extent(m) else {
        // all points coincide: one star with label 0
        let hst = star(n, 0.0)?;
        return Ok(UltrametricCover {
            hsts: vec![hst],
            rho: t,
            padding: rho,
            unit: 0.0,
        });
    };
    let ratio = 4.0 * rho / eps;
    let shifts = (ratio.ln() / (1.0 + eps).ln()).floor() as usize + 1;
    let mut hsts = Vec::new();
    for l in 0..shifts {
        let c = (1.0 + eps).powi(l as i32);
        // first level strictly below the smallest distance: singletons
        let mut deltas = vec![c * unit / ratio];
        while *deltas.last().unwrap() < diameter {
            let next = deltas.last().unwrap() * ratio;
            deltas.push(next);
        }
        let covers: Vec<PaddedPartitionCover> = deltas
            .iter()
            .enumerate()
            .map(|(i, &delta)| {
                build_padded_partition_cover(
                    m,
                    delta,
                    rho,
                    derive_seed(seed, "ultra-cover", ((l as u64) << 32) | i as u64),
                )
            })
            .collect::<Result<_>>()?;
        let tau = covers.iter().map(|c| c.tau()).max().unwrap_or(1);
        for j in 0..tau {
            let chain: Vec<Partition> = covers.iter().map(|c| c.partitions[j % c.tau()].clone()).collect();
            let h = laminarize(m, &chain, eps)?;
            hsts.push(hierarchy_to_hst(&h)?);
        }
    }
    Ok(UltrametricCover {
        hsts,
        rho: t,
        padding: rho,
        unit,
    })
}

fn star(n: usize, label: f64) -> Result<Hst> {
    if n == 1 {
        return Hst::new(vec![0.0], vec![vec![]], vec![0]);
    }
    let mut gamma = vec![0.0; n];
    gamma.push(label);
    let mut children = vec![Vec::new(); n];
    children.push((0..n).collect());
    Hst::new(gamma, children, (0..n).collect())
}

/// One ordering per HST: its leaf preorder, children visited by ascending
/// smallest point id. Windows stay inside the lca subtree, so the family is
/// a triangle LSO with the cover's stretch.
pub fn cover_preorder_to_triangle_lso(cover: &UltrametricCover) -> Result<OrderingFamily> {
    let Some(first) = cover.hsts.first() else {
        return Err(Error::Empty);
    };
    let n = first.points();
    let perms = cover.hsts.iter().map(|h| (None, h.preorder())).collect();
    OrderingFamily::new(LsoKind::Triangle, n, cover.rho, perms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lso::verify_triangle;
    use crate::metric::{LpSpace, PointSet};

    #[test]
    fn padding_formula() {
        assert_eq!(cover_padding(2.0, 0.25), 2.0);
        assert!((cover_padding(8.0, 0.25) - 8.0 * (1.0 - 1.25 / 16.0) / 1.5625).abs() < 1e-12);
    }

    #[test]
    fn two_points() {
        let m = LpSpace::euclidean(PointSet::new(vec![vec![0.0], vec![3.0]]).unwrap());
        let c = build_ultrametric_cover(&m, 4.0, 0.25, 1).unwrap();
        let r = verify_ultrametric_cover(&c, &m);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn line_of_five() {
        let m = LpSpace::euclidean(PointSet::new((0..5).map(|i| vec![i as f64]).collect()).unwrap());
        let c = build_ultrametric_cover(&m, 4.0, 0.25, 3).unwrap();
        assert!(verify_ultrametric_cover(&c, &m).passed());
        let fam = cover_preorder_to_triangle_lso(&c).unwrap();
        assert!(verify_triangle(&fam, &m).unwrap().passed());
    }

    #[test]
    fn coincident_points() {
        let m = LpSpace::euclidean(PointSet::new(vec![vec![1.0]; 3]).unwrap());
        let c = build_ultrametric_cover(&m, 4.0, 0.25, 3).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.min_dist(0, 2), 0.0);
    }
}
