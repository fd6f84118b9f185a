use serde::Serialize;

use super::{LsoKind, Ordering, OrderingFamily};
use crate::error::{Error, Result};
use crate::metric::{stretch_ratio, within, Metric};

/// At most this many violating pairs are kept in a report.
const MAX_LISTED: usize = 64;

/// A pair that no ordering serves within the target stretch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairViolation {
    pub x: usize,
    pub y: usize,
    /// Best stretch any ordering achieves for this pair.
    pub best: f64,
}

/// Outcome of checking a family against its declared stretch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub kind: LsoKind,
    pub rho: f64,
    pub tau: usize,
    pub orderings: usize,
    pub pairs_checked: usize,
    pub violation_count: usize,
    pub violations: Vec<PairViolation>,
    /// Largest per-pair stretch of the serving ordering.
    pub max_stretch: f64,
    pub membership_ok: bool,
}

impl VerificationReport {
    fn new(fam: &OrderingFamily) -> Self {
        VerificationReport {
            kind: fam.kind(),
            rho: fam.rho(),
            tau: fam.tau(),
            orderings: fam.len(),
            pairs_checked: 0,
            violation_count: 0,
            violations: Vec::new(),
            max_stretch: 0.0,
            membership_ok: true,
        }
    }

    pub fn passed(&self) -> bool {
        self.violation_count == 0 && self.membership_ok
    }

    fn record(&mut self, x: usize, y: usize, best: f64) {
        self.pairs_checked += 1;
        if !within(best, self.rho) {
            self.violation_count += 1;
            if self.violations.len() < MAX_LISTED {
                self.violations.push(PairViolation { x, y, best });
            }
        }
        if best > self.max_stretch {
            self.max_stretch = best;
        }
    }
}

fn check_kind(fam: &OrderingFamily, want: LsoKind) -> Result<()> {
    if fam.kind() != want {
        return Err(Error::KindMismatch {
            expected: want.to_string(),
            got: fam.kind().to_string(),
        });
    }
    Ok(())
}

fn check_universe<M: Metric + ?Sized>(fam: &OrderingFamily, m: &M) -> Result<()> {
    if fam.universe() > m.len() {
        return Err(Error::OutOfRange {
            index: fam.universe() - 1,
            size: m.len(),
        });
    }
    Ok(())
}

/// Smallest ρ for which ordering `o` serves the pair in the classic sense:
/// the window strictly between the two points splits into a prefix within
/// ρ·d of the earlier endpoint and a suffix within ρ·d of the later one.
/// Returns `None` when a point is missing from the ordering.
pub fn classic_window_stretch<M: Metric + ?Sized>(o: &Ordering, m: &M, x: usize, y: usize) -> Option<f64> {
    let (a, b) = (o.position(x)?, o.position(y)?);
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let perm = o.perm();
    let (e, l) = (perm[a], perm[b]);
    let window = &perm[a + 1..b];
    // Suffix maxima of distances to the later endpoint, then a forward sweep.
    let mut suffix = vec![0.0f64; window.len() + 1];
    for t in (0..window.len()).rev() {
        suffix[t] = suffix[t + 1].max(m.dist(l, window[t]));
    }
    let mut best = suffix[0];
    let mut prefix = 0.0f64;
    for (t, &w) in window.iter().enumerate() {
        prefix = prefix.max(m.dist(e, w));
        best = best.min(prefix.max(suffix[t + 1]));
    }
    Some(stretch_ratio(best, m.dist(x, y)))
}

/// Fast threshold test for the classic condition at radius `r`.
fn classic_ok<M: Metric + ?Sized>(o: &Ordering, m: &M, x: usize, y: usize, r: f64) -> bool {
    let (Some(a), Some(b)) = (o.position(x), o.position(y)) else {
        return false;
    };
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let perm = o.perm();
    let (e, l) = (perm[a], perm[b]);
    let mut t = a + 1;
    while t < b && m.dist(e, perm[t]) <= r {
        t += 1;
    }
    while t < b {
        if m.dist(l, perm[t]) > r {
            return false;
        }
        t += 1;
    }
    true
}

/// Checks every pair against the classic condition at the family's ρ.
pub fn verify_classic<M: Metric + ?Sized>(fam: &OrderingFamily, m: &M) -> Result<VerificationReport> {
    verify_classic_with_hint(fam, m, |_, _| None)
}

/// Like [`verify_classic`], but first tries the ordering suggested by `hint`
/// for each pair before scanning the whole family.
pub fn verify_classic_with_hint<M, H>(fam: &OrderingFamily, m: &M, hint: H) -> Result<VerificationReport>
where
    M: Metric + ?Sized,
    H: Fn(usize, usize) -> Option<usize>,
{
    check_kind(fam, LsoKind::Classic)?;
    check_universe(fam, m)?;
    let mut report = VerificationReport::new(fam);
    let n = fam.universe();
    let orderings = fam.orderings();
    for x in 0..n {
        for y in (x + 1)..n {
            let r = fam.rho() * m.dist(x, y) * (1.0 + crate::metric::REL_TOL);
            let hinted = hint(x, y).filter(|&s| s < orderings.len() && classic_ok(&orderings[s], m, x, y, r));
            let serving = hinted.or_else(|| orderings.iter().position(|o| classic_ok(o, m, x, y, r)));
            let best = match serving {
                Some(s) => classic_window_stretch(&orderings[s], m, x, y).unwrap_or(f64::INFINITY),
                None => orderings
                    .iter()
                    .filter_map(|o| classic_window_stretch(o, m, x, y))
                    .fold(f64::INFINITY, f64::min),
            };
            report.record(x, y, best);
        }
    }
    Ok(report)
}

/// For one ordering, the diameter of every window σ[i..=j] (endpoints
/// included), as a row-major `len × len` table. Computed by the interval
/// recurrence D(i,j) = max(D(i+1,j), D(i,j-1), d(σ_i, σ_j)).
pub fn window_diameter_table<M: Metric + ?Sized>(perm: &[usize], m: &M) -> Vec<f64> {
    let n = perm.len();
    let mut table = vec![0.0f64; n * n];
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            let below = if i + 1 < n { table[(i + 1) * n + j] } else { 0.0 };
            let left = table[i * n + j - 1];
            table[i * n + j] = below.max(left).max(m.dist(perm[i], perm[j]));
        }
    }
    table
}

/// Checks every pair: some ordering's window between the pair (endpoints
/// included) must have diameter at most ρ·d(x,y).
pub fn verify_triangle<M: Metric + ?Sized>(fam: &OrderingFamily, m: &M) -> Result<VerificationReport> {
    check_kind(fam, LsoKind::Triangle)?;
    check_universe(fam, m)?;
    let n = fam.universe();
    let mut best = vec![f64::INFINITY; n * n];
    let mut next = vec![0.0f64; n];
    let mut cur = vec![0.0f64; n];
    for o in fam.orderings() {
        let perm = o.perm();
        next.iter_mut().for_each(|v| *v = 0.0);
        for i in (0..n).rev() {
            let xi = perm[i];
            cur[i] = 0.0;
            for j in (i + 1)..n {
                let xj = perm[j];
                let d = m.dist(xi, xj);
                let w = next[j].max(cur[j - 1]).max(d);
                cur[j] = w;
                let (lo, hi) = if xi < xj { (xi, xj) } else { (xj, xi) };
                let s = stretch_ratio(w, d);
                let slot = &mut best[lo * n + hi];
                if s < *slot {
                    *slot = s;
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
    }
    let mut report = VerificationReport::new(fam);
    for x in 0..n {
        for y in (x + 1)..n {
            report.record(x, y, best[x * n + y]);
        }
    }
    Ok(report)
}

/// Checks that every ordering is sorted by distance to its root, that no
/// point lies in more than the declared τ orderings, and that every pair
/// shares an ordering whose root r has d(u,r) + d(r,v) ≤ ρ·d(u,v).
pub fn verify_rooted<M: Metric + ?Sized>(fam: &OrderingFamily, m: &M) -> Result<VerificationReport> {
    check_kind(fam, LsoKind::Rooted)?;
    check_universe(fam, m)?;
    let n = fam.universe();
    for (s, o) in fam.orderings().iter().enumerate() {
        let root = o.root().ok_or(Error::UnsortedRooted { ordering: s })?;
        let mut last = 0.0f64;
        for &x in o.perm() {
            let d = m.dist(root, x);
            if d < last {
                return Err(Error::UnsortedRooted { ordering: s });
            }
            last = d;
        }
    }
    let mut report = VerificationReport::new(fam);
    report.membership_ok = fam.memberships().iter().all(|&c| c <= fam.tau());
    let mut best = vec![f64::INFINITY; n * n];
    for o in fam.orderings() {
        let r = o.root().expect("checked above");
        let perm = o.perm();
        let to_root: Vec<f64> = perm.iter().map(|&x| m.dist(x, r)).collect();
        for i in 0..perm.len() {
            for j in (i + 1)..perm.len() {
                let (u, v) = (perm[i], perm[j]);
                let s = stretch_ratio(to_root[i] + to_root[j], m.dist(u, v));
                let (lo, hi) = if u < v { (u, v) } else { (v, u) };
                let slot = &mut best[lo * n + hi];
                if s < *slot {
                    *slot = s;
                }
            }
        }
    }
    for x in 0..n {
        for y in (x + 1)..n {
            report.record(x, y, best[x * n + y]);
        }
    }
    Ok(report)
}
