use serde::Serialize;

use super::scheme::{ordering_scale_range, BallCarvingScheme, ClusterKey};
use crate::error::{Error, Result};
use crate::lso::{verify_triangle, LsoKind, OrderingFamily, VerificationReport};
use crate::metric::{distance_extent, LpSpace, Norm, PointSet};
use crate::rng::derive_seed;

/// Parameters of the Euclidean (ℓp, `1 ≤ p ≤ 2`) triangle LSO.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleLsoParams {
    pub norm: Norm,
    /// Stretch parameter; the family targets `(1+δ)·t`.
    pub t: f64,
    pub delta: f64,
}

impl TriangleLsoParams {
    pub fn new(norm: Norm, t: f64, delta: f64) -> Self {
        TriangleLsoParams { norm, t, delta }
    }

    /// Stretch the family is built to achieve.
    pub fn target_stretch(&self) -> f64 {
        (1.0 + self.delta) * self.t
    }

    /// Carving works with half the requested stretch: a window confined to a
    /// cluster of radius `w` has diameter at most `2w`.
    pub fn inner_t(&self) -> f64 {
        self.t / 2.0
    }

    /// Number of width shifts of the carving.
    pub fn shift_count(&self, dim: usize) -> usize {
        let xi = BallCarvingScheme::scale_base(dim, self.inner_t(), self.norm);
        BallCarvingScheme::shift_count(xi, self.delta)
    }

    /// Initial orderings per shift, `⌈(√d/t)·e^{d/(2t²)}·ln n⌉`.
    pub fn initial_orderings(&self, dim: usize, n: usize) -> usize {
        let d = dim as f64;
        let m = d.sqrt() / self.t * (d / (2.0 * self.t * self.t)).exp() * (n.max(2) as f64).ln();
        (m.ceil() as usize).max(1)
    }
}

/// Largest useful stretch parameter for dimension `d`: `2√d`.
pub fn max_stretch_setting(dim: usize) -> f64 {
    2.0 * (dim as f64).sqrt()
}

/// One ordering: points sorted by their cluster keys from the top scale
/// down, ties broken by id.
pub fn carve_ordering(ps: &PointSet, scheme: &mut BallCarvingScheme) -> Result<Vec<usize>> {
    let n = ps.len();
    let (i_min, i_max) = ordering_scale_range(ps, scheme)?;
    let initial = (1usize << scheme.dim.min(16)) * (usize::BITS - n.max(2).leading_zeros()) as usize;
    let mut keys: Vec<Vec<ClusterKey>> = vec![Vec::new(); n];
    for i in (i_min..=i_max).rev() {
        let clustering = scheme.carve_scale_growing(ps, i, initial)?;
        for (x, k) in clustering.keys.into_iter().enumerate() {
            keys[x].push(k);
        }
    }
    let mut ids: Vec<usize> = (0..n).collect();
    ids.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
    Ok(ids)
}

fn trivial_family(n: usize, rho: f64) -> Result<OrderingFamily> {
    OrderingFamily::new(LsoKind::Triangle, n, rho, vec![(None, (0..n).collect())])
}

fn build_round(ps: &PointSet, params: &TriangleLsoParams, m: usize, seed: u64, round: u64) -> Result<OrderingFamily> {
    let n = ps.len();
    let rho = params.target_stretch();
    let space = LpSpace::new(ps.clone(), params.norm)?;
    if n <= 2 || distance_extent(&space).is_none() {
        return trivial_family(n, rho);
    }
    let shifts = params.shift_count(ps.dim());
    let mut perms = Vec::with_capacity(m * shifts);
    for s in 0..shifts {
        for k in 0..m {
            let tag = (round << 40) | ((s as u64) << 20) | k as u64;
            let mut scheme = BallCarvingScheme::new(
                ps.dim(),
                params.norm,
                params.inner_t(),
                params.delta,
                s,
                derive_seed(seed, "triangle-lso", tag),
            )?;
            perms.push((None, carve_ordering(ps, &mut scheme)?));
        }
    }
    OrderingFamily::new(LsoKind::Triangle, n, rho, perms)
}

/// Triangle LSO with `m` orderings per width shift, declared stretch
/// `(1+δ)·t`. Structure only; see [`build_triangle_lso_resampled`] for the
/// verified variant.
pub fn build_triangle_lso(ps: &PointSet, params: &TriangleLsoParams, m: usize, seed: u64) -> Result<OrderingFamily> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one ordering per shift".into()));
    }
    build_round(ps, params, m, seed, 0)
}

/// Result of the resampling loop.
#[derive(Debug, Clone, Serialize)]
pub struct ResampleOutcome {
    /// Number of rounds built (1 means the first attempt passed).
    pub rounds: usize,
    pub per_shift: usize,
    pub report: VerificationReport,
}

/// Builds with the initial ordering count and doubles it (with fresh seeds)
/// until the family verifies at `(1+δ)·t`, for at most `max_doublings`
/// doublings.
pub fn build_triangle_lso_resampled(
    ps: &PointSet,
    params: &TriangleLsoParams,
    seed: u64,
    max_doublings: usize,
) -> Result<(OrderingFamily, ResampleOutcome)> {
    let space = LpSpace::new(ps.clone(), params.norm)?;
    let mut m = params.initial_orderings(ps.dim(), ps.len());
    for round in 0..=max_doublings {
        let fam = build_round(ps, params, m, seed, round as u64)?;
        let report = verify_triangle(&fam, &space)?;
        if report.passed() {
            return Ok((
                fam,
                ResampleOutcome {
                    rounds: round + 1,
                    per_shift: m,
                    report,
                },
            ));
        }
        m *= 2;
    }
    Err(Error::RetryCap(format!(
        "triangle LSO failed verification after {max_doublings} doublings"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;

    #[test]
    fn two_points_get_one_ordering() {
        let ps = PointSet::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let fam = build_triangle_lso(&ps, &TriangleLsoParams::new(Norm::L(2.0), 2.0, 0.5), 3, 1).unwrap();
        assert_eq!(fam.len(), 1);
    }

    #[test]
    fn coincident_points_are_trivial() {
        let ps = PointSet::new(vec![vec![1.0]; 5]).unwrap();
        let fam = build_triangle_lso(&ps, &TriangleLsoParams::new(Norm::L(2.0), 2.0, 0.5), 3, 1).unwrap();
        assert_eq!(fam.len(), 1);
        let r = verify_triangle(&fam, &LpSpace::euclidean(ps)).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let ps = PointSet::new(
            (0..30)
                .map(|i| vec![(i * 7 % 11) as f64, (i * 3 % 13) as f64])
                .collect(),
        )
        .unwrap();
        let p = TriangleLsoParams::new(Norm::L(2.0), max_stretch_setting(2), 0.5);
        let a = build_triangle_lso(&ps, &p, 2, 5).unwrap();
        let b = build_triangle_lso(&ps, &p, 2, 5).unwrap();
        assert_eq!(a.orderings(), b.orderings());
        assert_eq!(a.len(), 2 * p.shift_count(2));
    }

    #[test]
    fn small_plane_instance_verifies() {
        let ps = PointSet::new(
            (0..40)
                .map(|i| {
                    let a = i as f64 * 0.7;
                    vec![a.cos() * (1.0 + i as f64), a.sin() * (1.0 + i as f64)]
                })
                .collect(),
        )
        .unwrap();
        let p = TriangleLsoParams::new(Norm::L(2.0), max_stretch_setting(2), 0.5);
        let (fam, out) = build_triangle_lso_resampled(&ps, &p, 11, 6).unwrap();
        assert!(out.report.passed());
        assert!(fam.len() >= p.shift_count(2));
        let space = LpSpace::euclidean(ps);
        assert!(space.dist(0, 1) > 0.0);
    }
}
