use super::two_hop::{dedup_path, TwoHopPathSpanner};
use crate::error::{Error, Result};

/// Hop bound of a [`MultiHopPathSpanner`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopCount {
    Three,
    Four,
}

#[derive(Debug, Clone)]
enum Node {
    Clique,
    Split {
        /// First position of each block, plus one past the end.
        starts: Vec<usize>,
        children: Vec<Node>,
        /// 2-hop structure over the boundary sequence (four-hop variant).
        boundary: Option<TwoHopPathSpanner>,
    },
}

/// Path spanner on positions `1..=n` with 3-hop or 4-hop monotone paths.
///
/// Both variants split a segment of length `L` into blocks and join every
/// position to the first and last position of its block. The 3-hop variant
/// uses blocks of size `⌈√L⌉` and a clique on the block boundaries; the 4-hop
/// variant uses blocks of size `⌈log₂ L⌉` and a 2-hop spanner on the boundary
/// sequence. Both recurse inside blocks.
#[derive(Debug, Clone)]
pub struct MultiHopPathSpanner {
    n: usize,
    hops: HopCount,
    root: Node,
    edges: Vec<(u32, u32)>,
}

impl MultiHopPathSpanner {
    pub fn new(n: usize, hops: HopCount) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("path length must be positive".into()));
        }
        let mut edges = Vec::new();
        let root = build(1, n, hops, &mut edges);
        edges.sort_unstable();
        edges.dedup();
        Ok(MultiHopPathSpanner { n, hops, root, edges })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn hop_bound(&self) -> usize {
        match self.hops {
            HopCount::Three => 3,
            HopCount::Four => 4,
        }
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

    /// Monotone path from `min(i,j)` to `max(i,j)` with at most `hop_bound()`
    /// edges.
    pub fn path(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        for x in [i, j] {
            if x == 0 || x > self.n {
                return Err(Error::OutOfRange { index: x, size: self.n });
            }
        }
        let (i, j) = (i.min(j), i.max(j));
        let mut node = &self.root;
        loop {
            match node {
                Node::Clique => return Ok(dedup_path(vec![i, j])),
                Node::Split {
                    starts,
                    children,
                    boundary,
                } => {
                    let bi = block_of(starts, i);
                    let bj = block_of(starts, j);
                    if bi == bj {
                        node = &children[bi];
                        continue;
                    }
                    let last_i = starts[bi + 1] - 1;
                    let first_j = starts[bj];
                    let mut p = vec![i, last_i];
                    if let Some(b) = boundary {
                        // boundary sequence: first_0, last_0, first_1, last_1, ...
                        let (a, c) = (2 * bi + 2, 2 * bj + 1);
                        let l = b.query(a, c)?;
                        p.push(boundary_position(starts, l));
                    }
                    p.push(first_j);
                    p.push(j);
                    return Ok(dedup_path(p));
                }
            }
        }
    }
}

fn block_of(starts: &[usize], x: usize) -> usize {
    starts.partition_point(|&s| s <= x) - 1
}

/// Position of entry `k` (1-based) of the boundary sequence.
fn boundary_position(starts: &[usize], k: usize) -> usize {
    let b = (k - 1) / 2;
    if k % 2 == 1 {
        starts[b]
    } else {
        starts[b + 1] - 1
    }
}

fn push_edge(edges: &mut Vec<(u32, u32)>, a: usize, b: usize) {
    if a != b {
        edges.push((a.min(b) as u32, a.max(b) as u32));
    }
}

fn build(lo: usize, hi: usize, hops: HopCount, edges: &mut Vec<(u32, u32)>) -> Node {
    let len = hi - lo + 1;
    let base = match hops {
        HopCount::Three => 4,
        HopCount::Four => 8,
    };
    if len <= base {
        for a in lo..=hi {
            for b in (a + 1)..=hi {
                push_edge(edges, a, b);
            }
        }
        return Node::Clique;
    }
    let block = match hops {
        HopCount::Three => (len as f64).sqrt().ceil() as usize,
        HopCount::Four => (usize::BITS - (len - 1).leading_zeros()) as usize,
    }
    .max(2);
    let mut starts: Vec<usize> = (lo..=hi).step_by(block).collect();
    starts.push(hi + 1);
    let blocks = starts.len() - 1;
    for b in 0..blocks {
        let (first, last) = (starts[b], starts[b + 1] - 1);
        for v in first..=last {
            push_edge(edges, v, first);
            push_edge(edges, v, last);
        }
    }
    let boundary = match hops {
        HopCount::Three => {
            let ends: Vec<usize> = (0..blocks).flat_map(|b| [starts[b], starts[b + 1] - 1]).collect();
            for a in 0..ends.len() {
                for b in (a + 1)..ends.len() {
                    push_edge(edges, ends[a], ends[b]);
                }
            }
            None
        }
        HopCount::Four => {
            let spanner = TwoHopPathSpanner::new(2 * blocks).expect("positive length");
            for (a, b) in spanner.edges() {
                push_edge(edges, boundary_position(&starts, a), boundary_position(&starts, b));
            }
            Some(spanner)
        }
    };
    let children = (0..blocks)
        .map(|b| build(starts[b], starts[b + 1] - 1, hops, edges))
        .collect();
    Node::Split {
        starts,
        children,
        boundary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_all(n: usize, hops: HopCount) {
        let s = MultiHopPathSpanner::new(n, hops).unwrap();
        for i in 1..=n {
            for j in i..=n {
                let p = s.path(i, j).unwrap();
                assert_eq!(*p.first().unwrap(), i);
                assert_eq!(*p.last().unwrap(), j);
                assert!(p.len() - 1 <= s.hop_bound(), "{hops:?} ({i},{j}) {p:?}");
                assert!(p.windows(2).all(|w| w[0] < w[1] || i == j));
                for w in p.windows(2) {
                    assert!(s.has_edge(w[0], w[1]), "{hops:?} missing {w:?}");
                }
            }
        }
    }

    #[test]
    fn three_hop_paths_are_valid() {
        for n in [1, 2, 5, 17, 100] {
            check_all(n, HopCount::Three);
        }
    }

    #[test]
    fn four_hop_paths_are_valid() {
        for n in [1, 9, 33, 200] {
            check_all(n, HopCount::Four);
        }
    }
}
