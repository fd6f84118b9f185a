//! Hierarchically well-separated trees (ultrametrics).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Metric, MetricKind};

/// A rooted tree whose leaves are the points; the distance between two
/// points is the label `Γ` of their lowest common ancestor. Labels do not
/// increase from a node to its children and leaves carry label 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Hst {
    gamma: Vec<f64>,
    children: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    leaf_of: Vec<usize>,
    point_of: Vec<Option<usize>>,
    root: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HstFile {
    gamma: Vec<f64>,
    children: Vec<Vec<usize>>,
    leaf_of: Vec<usize>,
}

impl Hst {
    /// Builds and validates an HST. `leaf_of[x]` is the leaf node of point
    /// `x`; leaves must be distinct nodes without children.
    pub fn new(gamma: Vec<f64>, children: Vec<Vec<usize>>, leaf_of: Vec<usize>) -> Result<Self> {
        let nodes = gamma.len();
        let bad = |s: String| Error::InvalidParameter(format!("invalid HST: {s}"));
        if nodes == 0 || children.len() != nodes {
            return Err(bad("node arrays disagree".into()));
        }
        let mut parent = vec![None; nodes];
        for (v, cs) in children.iter().enumerate() {
            for &c in cs {
                if c >= nodes || parent[c].is_some() || c == v {
                    return Err(bad(format!("child {c} of node {v}")));
                }
                parent[c] = Some(v);
            }
        }
        let roots: Vec<usize> = (0..nodes).filter(|&v| parent[v].is_none()).collect();
        if roots.len() != 1 {
            return Err(bad(format!("{} roots", roots.len())));
        }
        let root = roots[0];
        let mut depth = vec![usize::MAX; nodes];
        depth[root] = 0;
        let mut stack = vec![root];
        let mut seen = 1;
        while let Some(v) = stack.pop() {
            for &c in &children[v] {
                depth[c] = depth[v] + 1;
                seen += 1;
                if gamma[c] > gamma[v] {
                    return Err(bad(format!("label of node {c} exceeds its parent's")));
                }
                stack.push(c);
            }
        }
        if seen != nodes {
            return Err(bad("nodes unreachable from the root".into()));
        }
        let mut point_of = vec![None; nodes];
        for (x, &l) in leaf_of.iter().enumerate() {
            if l >= nodes || !children[l].is_empty() || point_of[l].is_some() {
                return Err(bad(format!("leaf of point {x}")));
            }
            if gamma[l] != 0.0 {
                return Err(bad(format!("leaf of point {x} has nonzero label")));
            }
            point_of[l] = Some(x);
        }
        if let Some(v) = (0..nodes).find(|&v| children[v].is_empty() && point_of[v].is_none()) {
            return Err(bad(format!("leaf node {v} holds no point")));
        }
        if gamma.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(bad("labels must be finite and non-negative".into()));
        }
        Ok(Hst {
            gamma,
            children,
            parent,
            depth,
            leaf_of,
            point_of,
            root,
        })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> usize {
        self.gamma.len()
    }

    pub fn points(&self) -> usize {
        self.leaf_of.len()
    }

    pub fn gamma(&self, v: usize) -> f64 {
        self.gamma[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn leaf_of(&self, x: usize) -> usize {
        self.leaf_of[x]
    }

    pub fn point_of(&self, v: usize) -> Option<usize> {
        self.point_of[v]
    }

    /// Lowest common ancestor by walking parents.
    pub fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].expect("non-root");
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].expect("non-root");
        }
        while a != b {
            a = self.parent[a].expect("non-root");
            b = self.parent[b].expect("non-root");
        }
        a
    }

    /// Points in preorder, visiting children in ascending order of the
    /// smallest point id below them.
    pub fn preorder(&self) -> Vec<usize> {
        let min_point = self.min_points();
        let mut out = Vec::with_capacity(self.points());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            if let Some(x) = self.point_of[v] {
                out.push(x);
            }
            let mut cs = self.children[v].clone();
            cs.sort_by_key(|&c| std::cmp::Reverse(min_point[c]));
            stack.extend(cs);
        }
        out
    }

    /// Smallest point id in each subtree.
    pub fn min_points(&self) -> Vec<usize> {
        let mut min_point = vec![usize::MAX; self.nodes()];
        let mut order = vec![self.root];
        let mut k = 0;
        while k < order.len() {
            let v = order[k];
            k += 1;
            order.extend(self.children[v].iter().copied());
        }
        for &v in order.iter().rev() {
            let own = self.point_of[v].unwrap_or(usize::MAX);
            min_point[v] = self.children[v].iter().map(|&c| min_point[c]).fold(own, usize::min);
        }
        min_point
    }

    /// Points below each node.
    pub fn leaves_below(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if let Some(x) = self.point_of[u] {
                out.push(x);
            }
            stack.extend(self.children[u].iter().copied());
        }
        out.sort_unstable();
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&HstFile {
            gamma: self.gamma.clone(),
            children: self.children.clone(),
            leaf_of: self.leaf_of.clone(),
        })
        .expect("HST serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: HstFile = serde_json::from_str(text)?;
        Hst::new(f.gamma, f.children, f.leaf_of)
    }
}

impl Metric for Hst {
    fn len(&self) -> usize {
        self.points()
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.gamma[self.lca(self.leaf_of[i], self.leaf_of[j])]
    }
    fn kind(&self) -> MetricKind {
        MetricKind::Ultrametric
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Hst {
        // root(4) -> a(2) -> {p0, p1}; root -> p2
        Hst::new(
            vec![4.0, 2.0, 0.0, 0.0, 0.0],
            vec![vec![1, 4], vec![2, 3], vec![], vec![], vec![]],
            vec![2, 3, 4],
        )
        .unwrap()
    }

    #[test]
    fn distances_are_lca_labels() {
        let h = small();
        assert_eq!(h.dist(0, 1), 2.0);
        assert_eq!(h.dist(0, 2), 4.0);
        assert_eq!(h.dist(1, 1), 0.0);
        assert_eq!(h.preorder(), vec![0, 1, 2]);
    }

    #[test]
    fn increasing_label_is_rejected() {
        let e = Hst::new(vec![1.0, 2.0, 0.0], vec![vec![1], vec![2], vec![]], vec![2]);
        assert!(e.is_err());
    }

    #[test]
    fn json_round_trip() {
        let h = small();
        assert_eq!(Hst::from_json(&h.to_json()).unwrap(), h);
    }
}
