use crate::error::{Error, Result};

/// 2-hop path spanner for the path graph on positions `1..=n`.
///
/// The path is split recursively at the midpoint `lo + s/2 - 1` of every
/// segment `[lo, hi]` of size `s` (on the padded length `2^δ`), and every
/// position is joined to the midpoints of all segments containing it. Those
/// midpoints form the responsible set `E_i` of position `i`.
#[derive(Debug, Clone)]
pub struct TwoHopPathSpanner {
    n: usize,
    levels: u32,
    offsets: Vec<usize>,
    mids: Vec<u32>,
}

impl TwoHopPathSpanner {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("path length must be positive".into()));
        }
        if n > u32::MAX as usize / 2 {
            return Err(Error::InvalidParameter(format!("path length {n} too large")));
        }
        let padded = n.next_power_of_two();
        let levels = padded.trailing_zeros();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut mids = Vec::with_capacity(n * levels as usize);
        offsets.push(0);
        for i in 1..=n {
            let x = i - 1;
            // Segment sizes 2^levels, ..., 2; midpoints in increasing order of
            // segment depth, then sorted.
            let start = mids.len();
            for h in (0..levels).rev() {
                let size = 1usize << (h + 1);
                let lo = x & !(size - 1);
                let mid = lo + (size >> 1); // 1-based midpoint lo+1 + size/2 - 1
                if mid <= n {
                    mids.push(mid as u32);
                }
            }
            mids[start..].sort_unstable();
            offsets.push(mids.len());
        }
        Ok(TwoHopPathSpanner {
            n,
            levels,
            offsets,
            mids,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// δ = log₂ of the padded length.
    pub fn levels(&self) -> u32 {
        self.levels
    }

    fn check(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n {
            return Err(Error::OutOfRange { index: i, size: self.n });
        }
        Ok(())
    }

    /// Sorted responsible midpoints of position `i`, possibly including `i`.
    pub fn responsible(&self, i: usize) -> Result<Vec<usize>> {
        self.check(i)?;
        Ok(self.mids[self.offsets[i - 1]..self.offsets[i]]
            .iter()
            .map(|&m| m as usize)
            .collect())
    }

    pub(crate) fn responsible_raw(&self, i: usize) -> &[u32] {
        &self.mids[self.offsets[i - 1]..self.offsets[i]]
    }

    /// Whether `m` is a responsible midpoint of `i`.
    pub fn is_responsible(&self, i: usize, m: usize) -> bool {
        i >= 1 && i <= self.n && self.responsible_raw(i).binary_search(&(m as u32)).is_ok()
    }

    /// Σ|E_i| counting self entries.
    pub fn total_responsible(&self) -> usize {
        self.mids.len()
    }

    /// Edge count as charged by the construction's recurrence: every
    /// (position, midpoint) incidence with distinct endpoints plus one per
    /// position. Equals `n·log₂n + 1` when `n` is a power of two.
    pub fn charged_edge_count(&self) -> usize {
        let self_entries = (1..=self.n).filter(|&i| self.is_responsible(i, i)).count();
        self.mids.len() - self_entries + self.n
    }

    /// Distinct undirected edges `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = (1..=self.n)
            .flat_map(|i| {
                self.responsible_raw(i)
                    .iter()
                    .map(move |&m| m as usize)
                    .filter(move |&m| m != i)
                    .map(move |m| if i < m { (i, m) } else { (m, i) })
            })
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Number of distinct undirected edges.
    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Midpoint `l` with `min(i,j) ≤ l ≤ max(i,j)` such that `l` is responsible
    /// for both endpoints: the path is `i → l → j`.
    pub fn query(&self, i: usize, j: usize) -> Result<usize> {
        self.check(i)?;
        self.check(j)?;
        Ok(midpoint(i.min(j), i.max(j)))
    }

    /// The monotone path from `i` to `j` with at most two edges.
    pub fn path(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        let l = self.query(i, j)?;
        Ok(dedup_path(vec![i, l, j]))
    }
}

/// Midpoint of the first segment separating `i ≤ j` (1-based).
#[inline]
pub(crate) fn midpoint(i: usize, j: usize) -> usize {
    let (x, y) = (i - 1, j - 1);
    let diff = x ^ y;
    if diff == 0 {
        return i;
    }
    let h = usize::BITS - 1 - diff.leading_zeros();
    y & !((1usize << h) - 1)
}

pub(crate) fn dedup_path(mut p: Vec<usize>) -> Vec<usize> {
    p.dedup();
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Recursive descent oracle for the separating midpoint.
    fn oracle(lo: usize, hi: usize, i: usize, j: usize) -> usize {
        if lo == hi {
            return lo;
        }
        let size = hi - lo + 1;
        let mid = lo + size / 2 - 1;
        if j <= mid {
            oracle(lo, mid, i, j)
        } else if i > mid {
            oracle(mid + 1, hi, i, j)
        } else {
            mid
        }
    }

    #[test]
    fn example_query() {
        let s = TwoHopPathSpanner::new(8).unwrap();
        assert_eq!(s.query(2, 7).unwrap(), 4);
        assert_eq!(s.query(3, 3).unwrap(), 3);
        assert_eq!(s.query(7, 2).unwrap(), 4);
    }

    #[test]
    fn query_matches_recursive_oracle() {
        for n in [1usize, 2, 3, 8, 13, 64] {
            let s = TwoHopPathSpanner::new(n).unwrap();
            let p = n.next_power_of_two();
            for i in 1..=n {
                for j in i..=n {
                    let l = s.query(i, j).unwrap();
                    assert_eq!(l, oracle(1, p, i, j), "n={n} ({i},{j})");
                    assert!(i <= l && l <= j);
                    if i < j {
                        assert!(s.is_responsible(i, l) && s.is_responsible(j, l));
                    }
                }
            }
        }
    }

    #[test]
    fn small_counts() {
        let s = TwoHopPathSpanner::new(2).unwrap();
        assert_eq!(s.edge_count(), 1);
        assert_eq!(s.charged_edge_count(), 3);
        let s = TwoHopPathSpanner::new(1).unwrap();
        assert_eq!(s.edge_count(), 0);
        assert_eq!(s.charged_edge_count(), 1);
        for d in 0..8u32 {
            let n = 1usize << d;
            let s = TwoHopPathSpanner::new(n).unwrap();
            assert_eq!(s.charged_edge_count(), n * d as usize + 1);
            assert_eq!(s.total_responsible(), n * d as usize);
            assert!(s.edge_count() <= s.charged_edge_count());
        }
    }

    #[test]
    fn out_of_range_is_rejected() {
        let s = TwoHopPathSpanner::new(4).unwrap();
        assert!(matches!(s.query(0, 2), Err(Error::OutOfRange { .. })));
        assert!(matches!(s.query(1, 5), Err(Error::OutOfRange { .. })));
        assert!(TwoHopPathSpanner::new(0).is_err());
    }
}
