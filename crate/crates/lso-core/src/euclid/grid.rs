use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lso::{verify_classic_with_hint, LsoKind, OrderingFamily, VerificationReport};
use crate::metric::{LpSpace, PointSet};
use crate::rng::rng_for;

/// Bits of quantized coordinate per axis.
const BITS: u32 = 40;
/// Largest dimension the grid construction accepts.
pub const MAX_GRID_DIM: usize = 4;
/// Refuse families with more orderings per shift than this.
const MAX_ORDERINGS_PER_SHIFT: usize = 1 << 16;
/// Refuse families whose materialized size (orderings × points) exceeds this.
const MAX_ENTRIES: usize = 1 << 27;

/// Rank of cell `v` in the `k`-th zigzag Hamiltonian path of `K_N`
/// (`k, k+1, k-1, k+2, k-2, …` mod `N`). For even `N` the `N/2` paths
/// partition the edges of the complete graph.
pub fn zigzag_rank(n_cells: u64, k: u64, v: u64) -> u64 {
    let j = (v + n_cells - k % n_cells) % n_cells;
    if j == 0 {
        0
    } else if j <= n_cells / 2 {
        2 * j - 1
    } else {
        2 * (n_cells - j)
    }
}

/// Index of the zigzag path containing the edge `{a, b}`.
pub fn zigzag_path_of(n_cells: u64, a: u64, b: u64) -> u64 {
    ((a + b) % n_cells) / 2
}

/// Classic LSO over randomly shifted hierarchical grids.
///
/// Coordinates are normalized into `[0, 1/2]`, shifted by a random vector in
/// `[0, 1/2)^d` and quantized. Cells split `m = 2^k` ways per axis per
/// digit; a digit spans `k` bit levels and the phase `r ∈ [0, k)` fixes
/// where digit boundaries fall. For each shift, phase and zigzag pattern
/// there is one ordering: a depth-first traversal that visits the children of
/// every cell in the pattern's order.
#[derive(Debug, Clone)]
pub struct GridLso {
    dim: usize,
    eps: f64,
    k: u32,
    lo: Vec<f64>,
    extent: f64,
    shifts: Vec<Vec<f64>>,
    /// `quantized[s][x·d + i]`
    quantized: Vec<Vec<u64>>,
    family: OrderingFamily,
}

/// Side multiplier `m` for precision `ε` in dimension `d`: the smallest
/// power of two with `m ≥ 2.5·√d/ε`.
pub fn grid_branching(dim: usize, eps: f64) -> u32 {
    let need = 2.5 * (dim as f64).sqrt() / eps;
    let mut k = 1u32;
    while ((1u64 << k) as f64) < need {
        k += 1;
    }
    k
}

impl GridLso {
    pub fn family(&self) -> &OrderingFamily {
        &self.family
    }

    pub fn into_family(self) -> OrderingFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Bit levels per digit.
    pub fn digit_bits(&self) -> u32 {
        self.k
    }

    pub fn shift_count(&self) -> usize {
        self.shifts.len()
    }

    fn cells(&self) -> u64 {
        1u64 << (self.k as usize * self.dim)
    }

    fn patterns(&self) -> u64 {
        self.cells() / 2
    }

    pub fn orderings_per_shift(&self) -> usize {
        (self.k as u64 * self.patterns()) as usize
    }

    fn ordering_index(&self, shift: usize, phase: u32, pattern: u64) -> usize {
        ((shift as u64 * self.k as u64 + phase as u64) * self.patterns() + pattern) as usize
    }

    /// Cell of `q` (one point's quantized coordinates) for bit levels
    /// `(lo, hi]`, as a mixed-radix index with radix `2^k`.
    fn digit(&self, q: &[u64], lo: u32, hi: u32) -> u64 {
        let width = hi - lo;
        let mask = (1u64 << width) - 1;
        let mut v = 0u64;
        for &c in q.iter().rev() {
            v = (v << self.k) | ((c >> (BITS - hi)) & mask);
        }
        v
    }

    /// Ordering that serves `(x, y)` by construction: in the shift where the
    /// two points share the deepest cell, the child cells at the next digit
    /// are adjacent in the chosen pattern. Runs in `O(d · shifts)` time.
    /// Returns `None` for points with identical quantized coordinates.
    pub fn satisfying_ordering(&self, x: usize, y: usize) -> Option<usize> {
        let d = self.dim;
        let mut best: Option<(u32, usize)> = None;
        for (s, q) in self.quantized.iter().enumerate() {
            let (qx, qy) = (&q[x * d..(x + 1) * d], &q[y * d..(y + 1) * d]);
            let common = qx
                .iter()
                .zip(qy)
                .map(|(a, b)| ((a ^ b) << (64 - BITS)).leading_zeros().min(BITS))
                .min()
                .unwrap_or(BITS);
            if common < BITS && best.is_none_or(|(l, _)| common > l) {
                best = Some((common, s));
            }
        }
        let (level, s) = best?;
        let hi = (level + self.k).min(BITS);
        let q = &self.quantized[s];
        let a = self.digit(&q[x * d..(x + 1) * d], level, hi);
        let b = self.digit(&q[y * d..(y + 1) * d], level, hi);
        let pattern = zigzag_path_of(self.cells(), a, b);
        Some(self.ordering_index(s, level % self.k, pattern))
    }

    fn quantize(&self, ps: &PointSet, shift: &[f64]) -> Vec<u64> {
        let scale = (1u64 << BITS) as f64;
        let top = (1u64 << BITS) - 1;
        let mut out = Vec::with_capacity(ps.len() * self.dim);
        for p in ps.iter() {
            for i in 0..self.dim {
                let u = if self.extent > 0.0 {
                    (p[i] - self.lo[i]) / self.extent
                } else {
                    0.0
                };
                let v = 0.5 * u.clamp(0.0, 1.0) + shift[i];
                out.push(((v * scale) as u64).min(top));
            }
        }
        out
    }

    fn orderings_for_shift(&self, q: &[u64], n: usize) -> Vec<(Option<usize>, Vec<usize>)> {
        let d = self.dim;
        let k = self.k;
        let cells = self.cells();
        let mut out = Vec::with_capacity(self.orderings_per_shift());
        for phase in 0..k {
            // digit boundaries: phase, phase + k, phase + 2k, … up to BITS
            let mut bounds = Vec::new();
            let mut hi = phase;
            while hi.saturating_sub(k) < BITS {
                let lo = hi.saturating_sub(k);
                let h = hi.min(BITS);
                if h > lo {
                    bounds.push((lo, h));
                }
                hi += k;
            }
            let digits: Vec<Vec<u64>> = (0..n)
                .map(|x| {
                    bounds
                        .iter()
                        .map(|&(lo, h)| self.digit(&q[x * d..(x + 1) * d], lo, h))
                        .collect()
                })
                .collect();
            for pattern in 0..self.patterns() {
                let keys: Vec<Vec<u64>> = digits
                    .iter()
                    .map(|ds| ds.iter().map(|&v| zigzag_rank(cells, pattern, v)).collect())
                    .collect();
                let mut perm: Vec<usize> = (0..n).collect();
                perm.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
                out.push((None, perm));
            }
        }
        out
    }

    fn push_shift(&mut self, ps: &PointSet, shift: Vec<f64>, perms: &mut Vec<(Option<usize>, Vec<usize>)>) {
        let q = self.quantize(ps, &shift);
        perms.extend(self.orderings_for_shift(&q, ps.len()));
        self.quantized.push(q);
        self.shifts.push(shift);
    }
}

fn random_shift(seed: u64, index: usize, dim: usize) -> Vec<f64> {
    let mut rng = rng_for(seed, "grid-shift", index as u64);
    (0..dim).map(|_| 0.5 * rng.random::<f64>()).collect()
}

fn check_grid_params(ps: &PointSet, eps: f64, shifts: usize) -> Result<u32> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!("ε must lie in (0, 1/2), got {eps}")));
    }
    let d = ps.dim();
    if d > MAX_GRID_DIM {
        return Err(Error::OutOfScope(format!(
            "grid LSO refused for d={d}: at most {MAX_GRID_DIM} dimensions"
        )));
    }
    let k = grid_branching(d, eps);
    let bits = k as usize * d;
    let per_shift = if bits >= 40 {
        usize::MAX
    } else {
        k as usize * (1usize << (bits - 1))
    };
    if per_shift > MAX_ORDERINGS_PER_SHIFT || per_shift.saturating_mul(shifts).saturating_mul(ps.len()) > MAX_ENTRIES {
        return Err(Error::OutOfScope(format!(
            "grid LSO refused for d={d}, ε={eps}: {per_shift} orderings per shift"
        )));
    }
    Ok(k)
}

fn empty_grid(ps: &PointSet, eps: f64, k: u32) -> GridLso {
    let d = ps.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in ps.iter() {
        for i in 0..d {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let extent = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    GridLso {
        dim: d,
        eps,
        k,
        lo,
        extent,
        shifts: Vec::new(),
        quantized: Vec::new(),
        family: OrderingFamily::new(LsoKind::Classic, ps.len(), eps, vec![(None, (0..ps.len()).collect())])
            .expect("identity ordering"),
    }
}

/// Grid classic LSO with a fixed number of random shifts, declared ρ = ε.
pub fn build_classic_grid_lso_with_shifts(ps: &PointSet, eps: f64, shifts: usize, seed: u64) -> Result<GridLso> {
    if shifts == 0 {
        return Err(Error::InvalidParameter("need at least one shift".into()));
    }
    let k = check_grid_params(ps, eps, shifts)?;
    let mut g = empty_grid(ps, eps, k);
    let mut perms = Vec::new();
    for s in 0..shifts {
        g.push_shift(ps, random_shift(seed, s, ps.dim()), &mut perms);
    }
    g.family = OrderingFamily::new(LsoKind::Classic, ps.len(), eps, perms)?;
    Ok(g)
}

/// Grid classic LSO certified on the input: starts with `2(d+1)` shifts and
/// doubles the shift count (keeping earlier shifts) until `verify_classic`
/// passes at ρ = ε, for at most `max_doublings` doublings.
pub fn build_classic_grid_lso(
    ps: &PointSet,
    eps: f64,
    seed: u64,
    max_doublings: usize,
) -> Result<(GridLso, VerificationReport)> {
    let space = LpSpace::euclidean(ps.clone());
    let mut shifts = 2 * (ps.dim() + 1);
    let k = check_grid_params(ps, eps, shifts)?;
    let mut g = empty_grid(ps, eps, k);
    let mut perms = Vec::new();
    for round in 0..=max_doublings {
        check_grid_params(ps, eps, shifts)?;
        for s in g.shift_count()..shifts {
            g.push_shift(ps, random_shift(seed, s, ps.dim()), &mut perms);
        }
        g.family = OrderingFamily::new(LsoKind::Classic, ps.len(), eps, perms.clone())?;
        let report = verify_classic_with_hint(&g.family, &space, |x, y| g.satisfying_ordering(x, y))?;
        if report.passed() {
            return Ok((g, report));
        }
        if round == max_doublings {
            break;
        }
        shifts *= 2;
    }
    Err(Error::RetryCap(format!(
        "grid LSO failed verification after {max_doublings} doublings"
    )))
}

/// Serializable summary of a grid family.
#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub dim: usize,
    pub eps: f64,
    pub digit_bits: u32,
    pub shifts: usize,
    pub orderings: usize,
}

impl From<&GridLso> for GridSummary {
    fn from(g: &GridLso) -> Self {
        GridSummary {
            dim: g.dim,
            eps: g.eps,
            digit_bits: g.k,
            shifts: g.shift_count(),
            orderings: g.family.len(),
        }
    }
}
