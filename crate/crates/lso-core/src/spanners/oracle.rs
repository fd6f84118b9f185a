use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde::Serialize;

use super::edges::EdgeSet;
use crate::error::{Error, Result};
use crate::hop::{HopCount, MultiHopPathSpanner, TwoHopPathSpanner};
use crate::lso::{LsoKind, OrderingFamily};
use crate::metric::{stretch_ratio, DistanceMatrix, Metric, REL_TOL};

/// How a [`SpannerOracle`] turns an ordering into edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleRule {
    /// Consecutive terminals at distance at most `2L`.
    Close,
    /// Hop-bounded path spanner over the terminals, edges up to `2ρL`.
    Hops(usize),
}

/// Spanner oracle built from an ordering family: given terminals `T` and a
/// scale `L`, returns an edge set meant to approximate every `T`-pair at
/// distance in `[L, 2L)`. Records the largest weak sparsity
/// `w(S) / (|T|·L)` seen over its invocations.
#[derive(Debug, Clone)]
pub struct SpannerOracle {
    fam: OrderingFamily,
    dist: DistanceMatrix,
    rule: OracleRule,
    invocations: usize,
    ws_sup: f64,
}

/// Edges returned by one oracle call.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutput {
    pub edges: EdgeSet,
    pub weight: f64,
    pub weak_sparsity: f64,
}

/// Oracle from a classic family: every pair of terminals adjacent in some
/// ordering (no terminal between them) and at distance at most `2L` is
/// joined.
pub fn spanner_oracle_classic<M: Metric + ?Sized>(fam: &OrderingFamily, m: &M) -> Result<SpannerOracle> {
    new_oracle(fam, m, LsoKind::Classic, OracleRule::Close)
}

/// Oracle from a triangle family: per ordering, a 2-, 3- or 4-hop path
/// spanner over the terminals in ordering order, keeping edges of weight at
/// most `2ρL`.
pub fn spanner_oracle_triangle<M: Metric + ?Sized>(fam: &OrderingFamily, m: &M, hops: usize) -> Result<SpannerOracle> {
    if !(2..=4).contains(&hops) {
        return Err(Error::InvalidParameter(format!(
            "hop bound must be 2, 3 or 4, got {hops}"
        )));
    }
    new_oracle(fam, m, LsoKind::Triangle, OracleRule::Hops(hops))
}

fn new_oracle<M: Metric + ?Sized>(
    fam: &OrderingFamily,
    m: &M,
    kind: LsoKind,
    rule: OracleRule,
) -> Result<SpannerOracle> {
    if fam.kind() != kind {
        return Err(Error::KindMismatch {
            expected: kind.to_string(),
            got: fam.kind().to_string(),
        });
    }
    if fam.universe() != m.len() {
        return Err(Error::DimensionMismatch {
            expected: m.len(),
            got: fam.universe(),
        });
    }
    Ok(SpannerOracle {
        fam: fam.clone(),
        dist: DistanceMatrix::from_metric(m),
        rule,
        invocations: 0,
        ws_sup: 0.0,
    })
}

fn hop_edges(len: usize, hops: usize) -> Result<Vec<(usize, usize)>> {
    Ok(match hops {
        2 => TwoHopPathSpanner::new(len)?.edges(),
        3 => MultiHopPathSpanner::new(len, HopCount::Three)?.edges().collect(),
        _ => MultiHopPathSpanner::new(len, HopCount::Four)?.edges().collect(),
    })
}

impl SpannerOracle {
    pub fn family(&self) -> &OrderingFamily {
        &self.fam
    }

    pub fn rule(&self) -> OracleRule {
        self.rule
    }

    /// Stretch guaranteed for terminal pairs in `[L, 2L)`: `1+8ρ` for
    /// classic families with `ρ ≤ 1/4` (none otherwise), `h·ρ` for the
    /// `h`-hop triangle oracle.
    pub fn stretch_bound(&self) -> Option<f64> {
        let rho = self.fam.rho();
        match self.rule {
            OracleRule::Close => (rho <= 0.25).then_some(1.0 + 8.0 * rho),
            OracleRule::Hops(h) => Some(h as f64 * rho),
        }
    }

    /// Largest weak sparsity over all calls so far.
    pub fn weak_sparsity_sup(&self) -> f64 {
        self.ws_sup
    }

    pub fn invocations(&self) -> usize {
        self.invocations
    }

    pub fn invoke(&mut self, terminals: &[usize], l: f64) -> Result<OracleOutput> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidParameter(format!("scale L must be positive, got {l}")));
        }
        let n = self.dist.len();
        let mut is_terminal = vec![false; n];
        for &t in terminals {
            if t >= n {
                return Err(Error::OutOfRange { index: t, size: n });
            }
            is_terminal[t] = true;
        }
        let count = is_terminal.iter().filter(|&&b| b).count();
        let mut edges = EdgeSet::new(n);
        let mut cache: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
        for o in self.fam.orderings() {
            let seq: Vec<usize> = o.perm().iter().copied().filter(|&x| is_terminal[x]).collect();
            if seq.len() < 2 {
                continue;
            }
            match self.rule {
                OracleRule::Close => {
                    for w in seq.windows(2) {
                        if self.dist.dist(w[0], w[1]) <= 2.0 * l {
                            edges.add(&self.dist, w[0], w[1]);
                        }
                    }
                }
                OracleRule::Hops(h) => {
                    let cap = 2.0 * self.fam.rho() * l;
                    if let Entry::Vacant(e) = cache.entry(seq.len()) {
                        e.insert(hop_edges(seq.len(), h)?);
                    }
                    for &(a, b) in &cache[&seq.len()] {
                        let (x, y) = (seq[a - 1], seq[b - 1]);
                        if self.dist.dist(x, y) <= cap {
                            edges.add(&self.dist, x, y);
                        }
                    }
                }
            }
        }
        let weight = edges.total_weight();
        let weak_sparsity = if count == 0 { 0.0 } else { weight / (count as f64 * l) };
        self.invocations += 1;
        self.ws_sup = self.ws_sup.max(weak_sparsity);
        Ok(OracleOutput {
            edges,
            weight,
            weak_sparsity,
        })
    }

    /// Shortest paths over the returned edges for every terminal pair with
    /// distance in `[L, 2L)`.
    pub fn check_stretch(&self, out: &OracleOutput, terminals: &[usize], l: f64) -> OracleStretchReport {
        let g = out.edges.to_graph();
        let bound = self.stretch_bound();
        let mut r = OracleStretchReport {
            pairs_checked: 0,
            max_stretch: 0.0,
            bound,
            violation_count: 0,
        };
        let mut ts = terminals.to_vec();
        ts.sort_unstable();
        ts.dedup();
        for (i, &u) in ts.iter().enumerate() {
            let d = g.distances(u, &[]);
            for &v in &ts[i + 1..] {
                let duv = self.dist.dist(u, v);
                if duv < l || duv >= 2.0 * l {
                    continue;
                }
                r.pairs_checked += 1;
                let s = stretch_ratio(d[v], duv);
                r.max_stretch = r.max_stretch.max(s);
                if bound.is_some_and(|b| s > b * (1.0 + REL_TOL)) {
                    r.violation_count += 1;
                }
            }
        }
        r
    }
}

/// Stretch of one oracle output on its terminal pairs in `[L, 2L)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleStretchReport {
    pub pairs_checked: usize,
    pub max_stretch: f64,
    pub bound: Option<f64>,
    pub violation_count: usize,
}

impl OracleStretchReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}
