use crate::error::{Error, Result};

/// Hierarchical bitmap over `0..len` supporting set, clear, and inclusive
/// predecessor/successor in `O(log_64 len)` word operations.
#[derive(Debug, Clone)]
struct BitTree {
    levels: Vec<Vec<u64>>,
}

impl BitTree {
    fn new(len: usize) -> Self {
        let mut levels = Vec::new();
        let mut words = len.div_ceil(64).max(1);
        loop {
            levels.push(vec![0u64; words]);
            if words == 1 {
                break;
            }
            words = words.div_ceil(64);
        }
        BitTree { levels }
    }

    fn set(&mut self, mut i: usize) {
        for lvl in 0..self.levels.len() {
            let w = &mut self.levels[lvl][i >> 6];
            let was_empty = *w == 0;
            *w |= 1u64 << (i & 63);
            if !was_empty {
                break;
            }
            i >>= 6;
        }
    }

    fn clear(&mut self, mut i: usize) {
        for lvl in 0..self.levels.len() {
            let w = &mut self.levels[lvl][i >> 6];
            *w &= !(1u64 << (i & 63));
            if *w != 0 {
                break;
            }
            i >>= 6;
        }
    }

    fn succ_at(&self, lvl: usize, q: usize) -> Option<usize> {
        let words = self.levels.get(lvl)?;
        let w = q >> 6;
        if w >= words.len() {
            return None;
        }
        let bits = words[w] & (!0u64 << (q & 63));
        if bits != 0 {
            return Some((w << 6) | bits.trailing_zeros() as usize);
        }
        let up = self.succ_at(lvl + 1, w + 1)?;
        Some((up << 6) | words[up].trailing_zeros() as usize)
    }

    fn pred_at(&self, lvl: usize, q: usize) -> Option<usize> {
        let words = self.levels.get(lvl)?;
        let w = (q >> 6).min(words.len() - 1);
        let q = if w < q >> 6 { (w << 6) | 63 } else { q };
        let r = q & 63;
        let mask = if r == 63 { !0u64 } else { (1u64 << (r + 1)) - 1 };
        let bits = words[w] & mask;
        if bits != 0 {
            return Some((w << 6) | (63 - bits.leading_zeros() as usize));
        }
        if w == 0 {
            return None;
        }
        let up = self.pred_at(lvl + 1, w - 1)?;
        Some((up << 6) | (63 - words[up].leading_zeros() as usize))
    }

    fn succ(&self, q: usize) -> Option<usize> {
        self.succ_at(0, q)
    }

    fn pred(&self, q: usize) -> Option<usize> {
        self.pred_at(0, q)
    }
}

/// Dynamic set of integers in `0..universe` with inclusive predecessor and
/// successor queries.
///
/// A two-level bucket structure: the high bits select a bucket of width
/// `2^b` (with `b ≈ log₂ log₂ universe`), nonempty buckets are indexed by a
/// hierarchical bitmap, and each bucket keeps its elements sorted. The
/// minimum is cached and refreshed by a successor query when it is deleted.
#[derive(Debug, Clone)]
pub struct PredecessorSet {
    universe: usize,
    shift: u32,
    top: BitTree,
    buckets: Vec<Vec<u32>>,
    len: usize,
    min: Option<usize>,
}

impl PredecessorSet {
    pub fn new(universe: usize) -> Result<Self> {
        if universe == 0 || universe > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "universe size {universe} out of range"
            )));
        }
        let log = usize::BITS - (universe.max(2) - 1).leading_zeros();
        let shift = (u32::BITS - (log.max(2) - 1).leading_zeros()).max(2);
        let nb = (universe >> shift) + 1;
        Ok(PredecessorSet {
            universe,
            shift,
            top: BitTree::new(nb),
            buckets: vec![Vec::new(); nb],
            len: 0,
            min: None,
        })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn check(&self, x: usize) -> Result<()> {
        if x >= self.universe {
            return Err(Error::OutOfRange {
                index: x,
                size: self.universe,
            });
        }
        Ok(())
    }

    /// Inserts `x`; returns whether it was absent.
    pub fn insert(&mut self, x: usize) -> Result<bool> {
        self.check(x)?;
        let b = x >> self.shift;
        let bucket = &mut self.buckets[b];
        match bucket.binary_search(&(x as u32)) {
            Ok(_) => Ok(false),
            Err(k) => {
                bucket.insert(k, x as u32);
                if bucket.len() == 1 {
                    self.top.set(b);
                }
                self.len += 1;
                if self.min.is_none_or(|m| x < m) {
                    self.min = Some(x);
                }
                Ok(true)
            }
        }
    }

    /// Removes `x`; returns whether it was present.
    pub fn remove(&mut self, x: usize) -> Result<bool> {
        self.check(x)?;
        let b = x >> self.shift;
        let bucket = &mut self.buckets[b];
        match bucket.binary_search(&(x as u32)) {
            Err(_) => Ok(false),
            Ok(k) => {
                bucket.remove(k);
                if bucket.is_empty() {
                    self.top.clear(b);
                }
                self.len -= 1;
                if self.min == Some(x) {
                    self.min = self.successor(0);
                }
                Ok(true)
            }
        }
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.universe && self.buckets[x >> self.shift].binary_search(&(x as u32)).is_ok()
    }

    /// Smallest element, in constant time.
    pub fn min(&self) -> Option<usize> {
        self.min
    }

    pub fn max(&self) -> Option<usize> {
        self.predecessor(self.universe - 1)
    }

    /// Largest element `≤ q`.
    pub fn predecessor(&self, q: usize) -> Option<usize> {
        let q = q.min(self.universe - 1);
        let b = q >> self.shift;
        let bucket = &self.buckets[b];
        let k = bucket.partition_point(|&v| v as usize <= q);
        if k > 0 {
            return Some(bucket[k - 1] as usize);
        }
        if b == 0 {
            return None;
        }
        let pb = self.top.pred(b - 1)?;
        self.buckets[pb].last().map(|&v| v as usize)
    }

    /// Smallest element `≥ q`.
    pub fn successor(&self, q: usize) -> Option<usize> {
        if q >= self.universe {
            return None;
        }
        let b = q >> self.shift;
        let bucket = &self.buckets[b];
        let k = bucket.partition_point(|&v| (v as usize) < q);
        if k < bucket.len() {
            return Some(bucket[k] as usize);
        }
        let nb = self.top.succ(b + 1)?;
        self.buckets[nb].first().map(|&v| v as usize)
    }

    /// Elements in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.buckets.iter().flatten().map(|&v| v as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_queries() {
        let mut s = PredecessorSet::new(16).unwrap();
        s.insert(3).unwrap();
        s.insert(7).unwrap();
        assert_eq!(s.predecessor(5), Some(3));
        assert_eq!(s.successor(5), Some(7));
        assert_eq!(s.predecessor(2), None);
        assert_eq!(s.successor(8), None);
        assert_eq!(s.predecessor(7), Some(7));
        assert_eq!(s.min(), Some(3));
        s.remove(3).unwrap();
        assert_eq!(s.min(), Some(7));
        s.remove(7).unwrap();
        assert_eq!(s.min(), None);
        assert!(s.is_empty());
    }

    #[test]
    fn out_of_universe_is_rejected() {
        let mut s = PredecessorSet::new(10).unwrap();
        assert!(matches!(s.insert(10), Err(Error::OutOfRange { .. })));
        assert!(matches!(s.remove(11), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn spans_many_buckets() {
        let mut s = PredecessorSet::new(1 << 20).unwrap();
        s.insert(5).unwrap();
        s.insert((1 << 20) - 1).unwrap();
        assert_eq!(s.successor(6), Some((1 << 20) - 1));
        assert_eq!(s.predecessor((1 << 20) - 2), Some(5));
        assert_eq!(s.max(), Some((1 << 20) - 1));
    }
}
