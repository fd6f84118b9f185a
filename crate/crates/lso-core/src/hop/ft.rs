use crate::error::{Error, Result};

/// f-fault-tolerant 2-hop path spanner for positions `1..=n`.
///
/// Each segment of size `s > f + 2` joins all of its positions to the block of
/// `f + 1` positions centered at its midpoint `m = lo + s/2 - 1`, then recurses
/// on both halves; segments of size at most `f + 2` become cliques. The fault
/// budget is rounded up to an even number.
#[derive(Debug, Clone)]
pub struct FtTwoHopPathSpanner {
    n: usize,
    requested: usize,
    f: usize,
    padded: usize,
    edges: Vec<(u32, u32)>,
}

impl FtTwoHopPathSpanner {
    pub fn new(n: usize, f: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("path length must be positive".into()));
        }
        let even = f + (f & 1);
        let padded = n.next_power_of_two();
        let mut edges = Vec::new();
        let mut stack = vec![(1usize, padded)];
        while let Some((lo, hi)) = stack.pop() {
            if lo > n {
                continue;
            }
            let size = hi - lo + 1;
            let top = hi.min(n);
            if size <= even + 2 {
                for a in lo..=top {
                    for b in (a + 1)..=top {
                        edges.push((a as u32, b as u32));
                    }
                }
                continue;
            }
            let m = lo + size / 2 - 1;
            let (blo, bhi) = (m - even / 2, (m + even / 2).min(top));
            for v in lo..=top {
                for b in blo..=bhi {
                    if v != b {
                        edges.push((v.min(b) as u32, v.max(b) as u32));
                    }
                }
            }
            stack.push((lo, m));
            stack.push((m + 1, hi));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(FtTwoHopPathSpanner {
            n,
            requested: f,
            f: even,
            padded,
            edges,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Requested fault budget.
    pub fn fault_budget(&self) -> usize {
        self.requested
    }

    /// Budget rounded up to an even number; the structure tolerates this many.
    pub fn rounded_budget(&self) -> usize {
        self.f
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(a, b)| (a as usize, b as usize))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let key = (u.min(v) as u32, u.max(v) as u32);
        self.edges.binary_search(&key).is_ok()
    }

    /// Upper bound `(n log n + 1)·(f + 1)` on the edge count for the padded
    /// length `n = 2^δ`, with the rounded budget.
    pub fn edge_bound(&self) -> usize {
        let d = self.padded.trailing_zeros() as usize;
        (self.padded * d + 1) * (self.f + 1)
    }

    /// A non-faulty `l` between `i` and `j` such that `i → l → j` uses edges of
    /// the spanner (one edge when `l` is an endpoint).
    pub fn query(&self, i: usize, j: usize, faults: &[usize]) -> Result<usize> {
        for &x in [i, j].iter() {
            if x == 0 || x > self.n {
                return Err(Error::OutOfRange { index: x, size: self.n });
            }
        }
        if faults.len() > self.requested {
            return Err(Error::TooManyFaults {
                got: faults.len(),
                budget: self.requested,
            });
        }
        let faulty = faults;
        for &x in [i, j].iter() {
            if faulty.contains(&x) {
                return Err(Error::FaultyEndpoint(x));
            }
        }
        let (i, j) = (i.min(j), i.max(j));
        if i == j {
            return Ok(i);
        }
        let (mut lo, mut hi) = (1usize, self.padded);
        loop {
            let size = hi - lo + 1;
            if size <= self.f + 2 {
                return Ok(i);
            }
            let m = lo + size / 2 - 1;
            if j <= m {
                hi = m;
            } else if i > m {
                lo = m + 1;
            } else {
                let from = i.max(m - self.f / 2);
                let to = j.min(m + self.f / 2);
                return (from..=to)
                    .find(|x| !faulty.contains(x))
                    .ok_or_else(|| Error::NoPath(format!("block around {m} fully faulty")));
            }
        }
    }

    /// The surviving monotone path from `i` to `j`.
    pub fn path(&self, i: usize, j: usize, faults: &[usize]) -> Result<Vec<usize>> {
        let l = self.query(i, j, faults)?;
        Ok(super::two_hop::dedup_path(vec![i, l, j]))
    }
}
