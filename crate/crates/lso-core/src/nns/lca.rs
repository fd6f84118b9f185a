use crate::hst::Hst;
use serde::{Deserialize, Serialize};

/// One heavy path visited on the way from the root to a node: the path id,
/// the index (depth along the path) where the walk leaves it, and that exit
/// node with its label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LcaEntry {
    pub path: u32,
    pub index: u32,
    pub node: u32,
    pub gamma: f64,
}

/// Heavy-path LCA label: one entry per heavy path on the root-to-node walk,
/// so at most `log₂ N + 1` entries.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LcaLabel {
    pub entries: Vec<LcaEntry>,
}

impl LcaLabel {
    /// Size in machine words (four per entry).
    pub fn words(&self) -> usize {
        4 * self.entries.len()
    }
}

/// Labels for every node of an HST.
pub fn lca_labels(hst: &Hst) -> Vec<LcaLabel> {
    let n = hst.nodes();
    let mut order = vec![hst.root()];
    let mut k = 0;
    while k < order.len() {
        let v = order[k];
        k += 1;
        order.extend(hst.children(v).iter().copied());
    }
    let mut size = vec![1usize; n];
    for &v in order.iter().rev() {
        if let Some(p) = hst.parent(v) {
            size[p] += size[v];
        }
    }
    let heavy: Vec<Option<usize>> = (0..n)
        .map(|v| {
            hst.children(v)
                .iter()
                .copied()
                .max_by(|&a, &b| size[a].cmp(&size[b]).then(b.cmp(&a)))
        })
        .collect();
    let mut labels = vec![LcaLabel::default(); n];
    let mut next_path = 0u32;
    let root = hst.root();
    labels[root].entries.push(LcaEntry {
        path: next_path,
        index: 0,
        node: root as u32,
        gamma: hst.gamma(root),
    });
    next_path += 1;
    for &v in &order {
        for &c in hst.children(v) {
            let mut entries = labels[v].entries.clone();
            if heavy[v] == Some(c) {
                let last = entries.last_mut().expect("nonempty");
                last.index += 1;
                last.node = c as u32;
                last.gamma = hst.gamma(c);
            } else {
                entries.push(LcaEntry {
                    path: next_path,
                    index: 0,
                    node: c as u32,
                    gamma: hst.gamma(c),
                });
                next_path += 1;
            }
            labels[c].entries = entries;
        }
    }
    labels
}

/// Lowest common ancestor (node, label) computed from two labels alone.
pub fn lca_from_labels(a: &LcaLabel, b: &LcaLabel) -> (usize, f64) {
    let (ea, eb) = (&a.entries, &b.entries);
    let common = ea.len().min(eb.len());
    let mut t = 0;
    while t < common && ea[t] == eb[t] {
        t += 1;
    }
    if t == common {
        // One label is a prefix of the other: the shorter node is an ancestor.
        let e = if ea.len() <= eb.len() { ea[t - 1] } else { eb[t - 1] };
        return (e.node as usize, e.gamma);
    }
    if ea[t].path == eb[t].path {
        let e = if ea[t].index <= eb[t].index { ea[t] } else { eb[t] };
        return (e.node as usize, e.gamma);
    }
    let e = ea[t - 1];
    (e.node as usize, e.gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_agree_with_parent_walk() {
        // Two-level tree: root 0 with children 1 (3 leaves) and 2 (2 leaves).
        let h = Hst::new(
            vec![8.0, 4.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![
                vec![1, 2],
                vec![3, 4, 5],
                vec![6, 7],
                vec![],
                vec![],
                vec![],
                vec![],
                vec![],
            ],
            vec![3, 4, 5, 6, 7],
        )
        .unwrap();
        let labels = lca_labels(&h);
        for a in 0..h.nodes() {
            for b in 0..h.nodes() {
                let (node, gamma) = lca_from_labels(&labels[a], &labels[b]);
                let want = h.lca(a, b);
                assert_eq!(node, want, "({a}, {b})");
                assert_eq!(gamma, h.gamma(want));
            }
        }
    }
}
