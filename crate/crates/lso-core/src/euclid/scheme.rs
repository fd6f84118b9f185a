use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{distance_extent, LpSpace, Norm, PointSet};
use crate::rng::rng_for;

/// Hard cap on centers per base scale before giving up on coverage.
const MAX_CENTERS: usize = 1 << 22;

/// Random ball carving across geometric scales.
///
/// At scale `i` the width is `w_i = ξ^i·(1+δ')^s` (with `δ' = δ/3` and shift
/// `s`). Centers `v` are uniform in `[0, 4w)^d` and replicated on the lattice
/// `v + 4w·Z^d`; balls have radius `w`. A point joins the first center (in
/// draw order) whose ball contains it. Centers are drawn for the base scales
/// `j < γ` only and reused, scaled by `ξ^{kγ}`, at scales `i = j + kγ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallCarvingScheme {
    pub dim: usize,
    pub norm: Norm,
    /// Internal stretch parameter.
    pub t: f64,
    pub delta: f64,
    pub xi: f64,
    pub gamma: usize,
    pub shift: usize,
    pub seed: u64,
    centers: Vec<Vec<f64>>,
}

/// Cluster of a point at one scale: the center index, then the lattice
/// offset of the covering translate. Compared lexicographically.
pub type ClusterKey = Vec<i64>;

/// Assignment of every point to a cluster at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleClustering {
    pub scale: i64,
    pub width: f64,
    pub keys: Vec<ClusterKey>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeFile {
    p: f64,
    t: f64,
    delta: f64,
    xi: f64,
    gamma: usize,
    shift: usize,
    seed: u64,
    centers: BTreeMap<usize, Vec<Vec<f64>>>,
}

impl BallCarvingScheme {
    /// Scale ratio: `12√d/t` for ℓ2 and `36d/t` for other ℓp.
    pub fn scale_base(dim: usize, t: f64, norm: Norm) -> f64 {
        if norm.is_euclidean() {
            12.0 * (dim as f64).sqrt() / t
        } else {
            36.0 * dim as f64 / t
        }
    }

    /// Number of base scales: `⌈d / t^p⌉`, at least one.
    pub fn reuse_period(dim: usize, t: f64, norm: Norm) -> usize {
        let p = if norm.is_euclidean() { 2.0 } else { norm.p() };
        ((dim as f64 / t.powf(p)).ceil() as usize).max(1)
    }

    /// Number of width shifts: `⌊log_{1+δ/3} ξ⌋ + 1`.
    pub fn shift_count(xi: f64, delta: f64) -> usize {
        (xi.ln() / (1.0 + delta / 3.0).ln()).floor() as usize + 1
    }

    /// A scheme with no centers drawn yet. `p` must lie in `[1, 2]`.
    pub fn new(dim: usize, norm: Norm, t: f64, delta: f64, shift: usize, seed: u64) -> Result<Self> {
        match norm.validate()? {
            Norm::L(p) if p <= 2.0 => {}
            _ => return Err(Error::InvalidParameter("ball carving needs 1 <= p <= 2".into())),
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameter(format!("delta {delta} outside (0, 1]")));
        }
        let xi = Self::scale_base(dim, t, norm);
        if !(t > 0.0) || !(xi > 1.0) || !xi.is_finite() {
            return Err(Error::InvalidParameter(format!("stretch {t} gives scale ratio {xi}")));
        }
        let shifts = Self::shift_count(xi, delta);
        if shift >= shifts {
            return Err(Error::InvalidParameter(format!("shift {shift} not below {shifts}")));
        }
        Ok(BallCarvingScheme {
            dim,
            norm,
            t,
            delta,
            xi,
            gamma: Self::reuse_period(dim, t, norm),
            shift,
            seed,
            centers: Vec::new(),
        })
    }

    /// Multiplicative width shift `(1+δ/3)^s`.
    pub fn shift_factor(&self) -> f64 {
        (1.0 + self.delta / 3.0).powi(self.shift as i32)
    }

    /// Ball radius at scale `i`.
    pub fn width(&self, i: i64) -> f64 {
        self.xi.powi(i as i32) * self.shift_factor()
    }

    fn base_of(&self, i: i64) -> (usize, i64) {
        let g = self.gamma as i64;
        (i.rem_euclid(g) as usize, i.div_euclid(g))
    }

    /// Centers drawn for base scale `j`, in draw order.
    pub fn base_centers(&self, j: usize) -> Vec<Vec<f64>> {
        self.centers
            .get(j)
            .map(|c| c.chunks_exact(self.dim).map(|v| v.to_vec()).collect())
            .unwrap_or_default()
    }

    pub fn center_count(&self, j: usize) -> usize {
        self.centers.get(j).map_or(0, |c| c.len() / self.dim)
    }

    /// Centers used at scale `i`: the base centers scaled by `ξ^{kγ}`.
    pub fn centers_at_scale(&self, i: i64) -> Vec<Vec<f64>> {
        let (j, k) = self.base_of(i);
        let factor = self.xi.powi((k * self.gamma as i64) as i32);
        self.base_centers(j)
            .into_iter()
            .map(|v| v.into_iter().map(|c| c * factor).collect())
            .collect()
    }

    /// Draws centers for base scale `j` until there are `count` of them. The
    /// draw sequence depends only on the seed, so earlier centers are kept.
    pub fn ensure_centers(&mut self, j: usize, count: usize) {
        if self.centers.len() <= j {
            self.centers.resize(j + 1, Vec::new());
        }
        if self.center_count(j) >= count {
            return;
        }
        let side = 4.0 * self.width(j as i64);
        let mut rng = rng_for(self.seed, "carving-centers", ((self.shift as u64) << 32) | j as u64);
        let mut flat = Vec::with_capacity(count * self.dim);
        for _ in 0..count * self.dim {
            flat.push(rng.random::<f64>() * side);
        }
        self.centers[j] = flat;
    }

    /// Assigns every point at scale `i`; fails if some point is not covered
    /// by any of the current centers.
    pub fn carve_scale(&self, ps: &PointSet, i: i64) -> Result<ScaleClustering> {
        if ps.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: ps.dim(),
            });
        }
        let w = self.width(i);
        let spacing = 4.0 * w;
        let centers: Vec<f64> = {
            let (j, k) = self.base_of(i);
            let factor = self.xi.powi((k * self.gamma as i64) as i32);
            self.centers
                .get(j)
                .map_or(Vec::new(), |c| c.iter().map(|x| x * factor).collect())
        };
        let p = self.norm.p();
        let wp = if p == 2.0 { w * w } else { w.powf(p) };
        let mut keys = Vec::with_capacity(ps.len());
        let mut offset = vec![0.0f64; self.dim];
        for (x, point) in ps.iter().enumerate() {
            let mut found = None;
            'centers: for (c, v) in centers.chunks_exact(self.dim).enumerate() {
                let mut acc = 0.0;
                for k in 0..self.dim {
                    let diff = point[k] - v[k];
                    let o = diff - spacing * (diff / spacing).round();
                    let a = o.abs();
                    if a > w {
                        continue 'centers;
                    }
                    acc += if p == 2.0 { a * a } else { a.powf(p) };
                    if acc > wp {
                        continue 'centers;
                    }
                    offset[k] = diff;
                }
                found = Some(c);
                break;
            }
            let c = found.ok_or(Error::CoverageExhausted { scale: i, point: x })?;
            let mut key = Vec::with_capacity(self.dim + 1);
            key.push(c as i64);
            key.extend(offset.iter().map(|d| (d / spacing).round() as i64));
            keys.push(key);
        }
        Ok(ScaleClustering {
            scale: i,
            width: w,
            keys,
        })
    }

    /// Carves scale `i`, doubling the base scale's centers on coverage
    /// failure, starting from `initial` centers.
    pub fn carve_scale_growing(&mut self, ps: &PointSet, i: i64, initial: usize) -> Result<ScaleClustering> {
        let (j, _) = self.base_of(i);
        let mut count = self.center_count(j).max(initial).max(1);
        loop {
            self.ensure_centers(j, count);
            match self.carve_scale(ps, i) {
                Ok(c) => return Ok(c),
                Err(Error::CoverageExhausted { .. }) if count < MAX_CENTERS => count *= 2,
                Err(Error::CoverageExhausted { scale, point }) => {
                    return Err(Error::RetryCap(format!(
                        "point {point} uncovered at scale {scale} with {count} centers"
                    )))
                }
                Err(e) => return Err(e),
            }
        }
    }

    pub fn to_json(&self) -> String {
        let centers = (0..self.centers.len())
            .filter(|&j| self.center_count(j) > 0)
            .map(|j| (j, self.base_centers(j)))
            .collect();
        serde_json::to_string(&SchemeFile {
            p: self.norm.p(),
            t: self.t,
            delta: self.delta,
            xi: self.xi,
            gamma: self.gamma,
            shift: self.shift,
            seed: self.seed,
            centers,
        })
        .expect("scheme serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: SchemeFile = serde_json::from_str(text)?;
        let dim = f
            .centers
            .values()
            .flat_map(|c| c.first())
            .map(|v| v.len())
            .next()
            .ok_or_else(|| Error::InvalidParameter("scheme without centers".into()))?;
        let mut s = BallCarvingScheme::new(dim, Norm::L(f.p), f.t, f.delta, f.shift, f.seed)?;
        if s.gamma != f.gamma || (s.xi - f.xi).abs() > 1e-12 * s.xi {
            return Err(Error::InvalidParameter("scheme parameters are inconsistent".into()));
        }
        for (j, list) in f.centers {
            if s.centers.len() <= j {
                s.centers.resize(j + 1, Vec::new());
            }
            for v in list {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: v.len(),
                    });
                }
                s.centers[j].extend(v);
            }
        }
        Ok(s)
    }
}

/// Scales to carve: `i_min` is the largest `i` with `2·w_i` below the minimum
/// pairwise distance (all points separated) and `i_max` the smallest `i` with
/// `w_i` at least the maximum pairwise distance.
pub fn ordering_scale_range(ps: &PointSet, scheme: &BallCarvingScheme) -> Result<(i64, i64)> {
    let space = LpSpace::new(ps.clone(), scheme.norm)?;
    let (lo, hi) = distance_extent(&space).ok_or(Error::Degenerate)?;
    let guess = |x: f64| ((x / scheme.shift_factor()).ln() / scheme.xi.ln()).floor() as i64;
    let mut i_min = guess(lo / 2.0) + 1;
    while 2.0 * scheme.width(i_min) >= lo {
        i_min -= 1;
    }
    while 2.0 * scheme.width(i_min + 1) < lo {
        i_min += 1;
    }
    let mut i_max = guess(hi) - 1;
    while scheme.width(i_max) < hi {
        i_max += 1;
    }
    while scheme.width(i_max - 1) >= hi {
        i_max -= 1;
    }
    Ok((i_min, i_max.max(i_min)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_base_example() {
        assert_eq!(BallCarvingScheme::scale_base(9, 3.0, Norm::L(2.0)), 12.0);
        assert_eq!(BallCarvingScheme::scale_base(2, 3.0, Norm::L(1.0)), 24.0);
    }

    #[test]
    fn rejects_bad_norm() {
        assert!(BallCarvingScheme::new(2, Norm::L(3.0), 1.0, 0.5, 0, 0).is_err());
        assert!(BallCarvingScheme::new(2, Norm::Inf, 1.0, 0.5, 0, 0).is_err());
    }

    #[test]
    fn scaling_points_by_xi_shifts_range_by_one() {
        let ps = PointSet::new(vec![vec![0.0, 0.0], vec![1.0, 0.3], vec![5.0, 2.0], vec![2.2, 7.1]]).unwrap();
        let s = BallCarvingScheme::new(2, Norm::L(2.0), 1.5, 0.5, 2, 1).unwrap();
        let (a, b) = ordering_scale_range(&ps, &s).unwrap();
        let (c, d) = ordering_scale_range(&ps.scaled(s.xi), &s).unwrap();
        assert_eq!((c, d), (a + 1, b + 1));
    }

    #[test]
    fn centers_are_reused_across_periods() {
        let mut s = BallCarvingScheme::new(3, Norm::L(2.0), 1.0, 0.5, 1, 9).unwrap();
        assert_eq!(s.gamma, 3);
        s.ensure_centers(1, 10);
        let base = s.base_centers(1);
        let f = s.xi.powi(3);
        let at4 = s.centers_at_scale(4);
        for (a, b) in base.iter().zip(&at4) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x * f, *y);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let mut s = BallCarvingScheme::new(2, Norm::L(2.0), 1.5, 0.5, 0, 3).unwrap();
        s.ensure_centers(0, 5);
        let back = BallCarvingScheme::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }
}
