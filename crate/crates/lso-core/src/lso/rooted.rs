use std::collections::{HashMap, VecDeque};
use std::ops::Range;

use super::{LsoKind, OrderingFamily};
use crate::error::{Error, Result};
use crate::metric::WeightedGraph;

/// Checks that `g` is a tree: connected with exactly `n - 1` edges.
fn check_tree(g: &WeightedGraph) -> Result<()> {
    let n = g.len();
    if g.edges().len() != n - 1 {
        return Err(Error::NotATree(format!("{} edges on {} vertices", g.edges().len(), n)));
    }
    let d = g.dijkstra(0, None);
    if let Some(v) = d.iter().position(|x| x.is_infinite()) {
        return Err(Error::NotATree(format!("vertex {v} unreachable")));
    }
    Ok(())
}

/// Rooted orderings for a weighted tree by centroid decomposition: one
/// ordering per centroid over its component, sorted by tree distance to the
/// centroid (ties by id); single-vertex components get no ordering. Each
/// point lies in at most ⌊log₂ n⌋ + 1 orderings, and every pair shares the
/// ordering of the first centroid separating it, which lies on the path
/// between them (stretch 1).
pub fn build_rooted_lso_tree(tree: &WeightedGraph) -> Result<OrderingFamily> {
    check_tree(tree)?;
    let n = tree.len();
    let mut removed = vec![false; n];
    let mut perms = Vec::with_capacity(n);
    let mut stack = vec![0usize];
    let mut size = vec![0usize; n];
    let mut parent = vec![usize::MAX; n];
    while let Some(start) = stack.pop() {
        // DFS order of the component containing `start`.
        let mut order = vec![start];
        parent[start] = usize::MAX;
        let mut k = 0;
        while k < order.len() {
            let v = order[k];
            k += 1;
            for &(u, _) in tree.neighbors(v) {
                if !removed[u] && u != parent[v] {
                    parent[u] = v;
                    order.push(u);
                }
            }
        }
        for &v in order.iter().rev() {
            size[v] = 1 + tree
                .neighbors(v)
                .iter()
                .filter(|&&(u, _)| !removed[u] && parent[u] == v)
                .map(|&(u, _)| size[u])
                .sum::<usize>();
        }
        let total = order.len();
        if total == 1 && n > 1 {
            // a lone vertex already shares an ordering with every other point
            removed[start] = true;
            continue;
        }
        let centroid = *order
            .iter()
            .find(|&&v| {
                let heaviest_child = tree
                    .neighbors(v)
                    .iter()
                    .filter(|&&(u, _)| !removed[u] && parent[u] == v)
                    .map(|&(u, _)| size[u])
                    .max()
                    .unwrap_or(0);
                heaviest_child.max(total - size[v]) <= total / 2
            })
            .expect("every tree has a centroid");

        // Distances from the centroid inside the component.
        let mut dist: HashMap<usize, f64> = HashMap::with_capacity(total);
        dist.insert(centroid, 0.0);
        let mut queue = VecDeque::from([centroid]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[&v];
            for &(u, w) in tree.neighbors(v) {
                if !removed[u] && !dist.contains_key(&u) {
                    dist.insert(u, dv + w);
                    queue.push_back(u);
                }
            }
        }
        let mut members: Vec<(f64, usize)> = dist.into_iter().map(|(v, d)| (d, v)).collect();
        members.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        perms.push((Some(centroid), members.into_iter().map(|(_, v)| v).collect()));

        removed[centroid] = true;
        for &(u, _) in tree.neighbors(centroid) {
            if !removed[u] {
                stack.push(u);
            }
        }
    }
    OrderingFamily::new(LsoKind::Rooted, n, 1.0, perms)
}

/// A tree decomposition: bags of vertices connected by a tree of bag edges.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeDecomposition {
    pub n: usize,
    pub bags: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    /// Largest bag size minus one.
    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(1).saturating_sub(1)
    }

    fn bag_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Checks the bag tree and the three decomposition axioms against `g`.
    pub fn validate(&self, g: &WeightedGraph) -> Result<()> {
        let nb = self.bags.len();
        let bad = |axiom: &str| Error::InvalidDecomposition {
            axiom: axiom.to_string(),
        };
        if nb == 0 {
            return Err(bad("no bags"));
        }
        if self.n != g.len() {
            return Err(bad("vertex count differs from the graph"));
        }
        for &(a, b) in &self.edges {
            if a >= nb || b >= nb || a == b {
                return Err(bad("bag tree: invalid bag edge"));
            }
        }
        if self.edges.len() != nb - 1 || count_components(nb, &self.bag_adjacency(), |_| true) != 1 {
            return Err(bad("bag tree: bags do not form a tree"));
        }
        let mut bags_of = vec![Vec::new(); self.n];
        for (b, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                if v >= self.n {
                    return Err(bad("vertex coverage: bag mentions an unknown vertex"));
                }
                bags_of[v].push(b);
            }
        }
        if let Some(v) = bags_of.iter().position(|l| l.is_empty()) {
            return Err(bad(&format!("vertex coverage: vertex {v} in no bag")));
        }
        for &(u, v, _) in g.edges() {
            let covered = bags_of[u].iter().any(|&b| self.bags[b].contains(&v));
            if !covered {
                return Err(bad(&format!("edge coverage: edge ({u}, {v}) in no bag")));
            }
        }
        let adj = self.bag_adjacency();
        for (v, list) in bags_of.iter().enumerate() {
            let mut inside = vec![false; nb];
            for &b in list {
                inside[b] = true;
            }
            if count_components(nb, &adj, |b| inside[b]) != 1 {
                return Err(bad(&format!(
                    "running intersection: bags of vertex {v} are disconnected"
                )));
            }
        }
        Ok(())
    }
}

/// Number of connected components among the nodes with `keep(node)`.
fn count_components(n: usize, adj: &[Vec<usize>], keep: impl Fn(usize) -> bool) -> usize {
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] || !keep(s) {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] && keep(u) {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
    }
    count
}

/// One step of the separator recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRecord {
    pub parent: Option<usize>,
    pub depth: usize,
    /// Separator bag chosen for this cluster.
    pub bag: usize,
    /// Indices of the orderings rooted at the bag's vertices.
    pub orderings: Range<usize>,
}

/// Rooted orderings for a bounded-treewidth graph, with the recursion tree
/// needed to find the separating orderings of a pair.
#[derive(Debug, Clone)]
pub struct TreewidthLso {
    pub family: OrderingFamily,
    pub clusters: Vec<ClusterRecord>,
    /// Cluster in which each vertex was removed as part of the separator.
    pub home: Vec<usize>,
}

impl TreewidthLso {
    /// Orderings of the last cluster containing both vertices. Some root of
    /// these orderings lies on a shortest path between them.
    pub fn separating_orderings(&self, u: usize, v: usize) -> Range<usize> {
        let (mut a, mut b) = (self.home[u], self.home[v]);
        while self.clusters[a].depth > self.clusters[b].depth {
            a = self.clusters[a].parent.expect("deeper cluster has a parent");
        }
        while self.clusters[b].depth > self.clusters[a].depth {
            b = self.clusters[b].parent.expect("deeper cluster has a parent");
        }
        while a != b {
            a = self.clusters[a].parent.expect("clusters share the root");
            b = self.clusters[b].parent.expect("clusters share the root");
        }
        self.clusters[a].orderings.clone()
    }
}

/// Rooted orderings from a tree decomposition: recursively pick the bag that
/// minimizes the largest remaining bag component (ties by lowest bag id),
/// create one ordering per vertex of that bag over the current cluster sorted
/// by graph distance, delete the bag and recurse on the components.
pub fn build_rooted_lso_treewidth(g: &WeightedGraph, td: &TreeDecomposition) -> Result<TreewidthLso> {
    td.validate(g)?;
    let n = g.len();
    let nb = td.bags.len();
    let adj = td.bag_adjacency();
    let mut bag_removed = vec![false; nb];
    let mut deleted = vec![false; n];
    let mut dist_cache: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut perms = Vec::new();
    let mut clusters: Vec<ClusterRecord> = Vec::new();
    let mut home = vec![usize::MAX; n];

    // (component bags, parent cluster, depth)
    let mut stack: Vec<(Vec<usize>, Option<usize>, usize)> = vec![((0..nb).collect(), None, 0)];
    while let Some((comp, parent, depth)) = stack.pop() {
        let sep = best_separator(&comp, &adj, &bag_removed);
        let mut in_cluster = vec![false; n];
        let mut cluster: Vec<usize> = Vec::new();
        for &b in &comp {
            for &v in &td.bags[b] {
                if !deleted[v] && !in_cluster[v] {
                    in_cluster[v] = true;
                    cluster.push(v);
                }
            }
        }
        let first = perms.len();
        let mut roots = td.bags[sep].clone();
        roots.sort_unstable();
        roots.dedup();
        for &x in &roots {
            let dist = dist_cache.entry(x).or_insert_with(|| g.dijkstra(x, None));
            if let Some(v) = dist.iter().position(|d| d.is_infinite()) {
                return Err(Error::Disconnected { vertex: v });
            }
            let mut members: Vec<usize> = cluster.iter().copied().filter(|&v| v != x).collect();
            members.push(x);
            members.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
            perms.push((Some(x), members));
        }
        let id = clusters.len();
        clusters.push(ClusterRecord {
            parent,
            depth,
            bag: sep,
            orderings: first..perms.len(),
        });
        for &v in &td.bags[sep] {
            if !deleted[v] {
                deleted[v] = true;
                home[v] = id;
            }
        }
        bag_removed[sep] = true;
        for sub in split_components(&comp, &adj, &bag_removed) {
            stack.push((sub, Some(id), depth + 1));
        }
    }
    debug_assert!(home.iter().all(|&h| h != usize::MAX));
    let family = OrderingFamily::new(LsoKind::Rooted, n, 1.0, perms)?;
    Ok(TreewidthLso { family, clusters, home })
}

/// Bag of `comp` minimizing the largest component left after removing it.
fn best_separator(comp: &[usize], adj: &[Vec<usize>], removed: &[bool]) -> usize {
    if comp.len() == 1 {
        return comp[0];
    }
    let total = comp.len();
    let root = comp[0];
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut order = vec![root];
    parent.insert(root, usize::MAX);
    let mut k = 0;
    while k < order.len() {
        let v = order[k];
        k += 1;
        for &u in &adj[v] {
            if !removed[u] && !parent.contains_key(&u) {
                parent.insert(u, v);
                order.push(u);
            }
        }
    }
    let mut size: HashMap<usize, usize> = order.iter().map(|&v| (v, 1)).collect();
    let mut heaviest: HashMap<usize, usize> = HashMap::new();
    for &v in order.iter().rev() {
        let p = parent[&v];
        if p != usize::MAX {
            let s = size[&v];
            *size.get_mut(&p).expect("parent visited") += s;
            let h = heaviest.entry(p).or_insert(0);
            *h = (*h).max(s);
        }
    }
    let mut best = (usize::MAX, usize::MAX);
    for &b in comp {
        let largest = heaviest.get(&b).copied().unwrap_or(0).max(total - size[&b]);
        if (largest, b) < best {
            best = (largest, b);
        }
    }
    best.1
}

/// Connected components of the non-removed bags of `comp`.
fn split_components(comp: &[usize], adj: &[Vec<usize>], removed: &[bool]) -> Vec<Vec<usize>> {
    let mut seen: HashMap<usize, bool> = HashMap::new();
    let mut out = Vec::new();
    for &s in comp {
        if removed[s] || seen.contains_key(&s) {
            continue;
        }
        seen.insert(s, true);
        let mut part = vec![s];
        let mut k = 0;
        while k < part.len() {
            let v = part[k];
            k += 1;
            for &u in &adj[v] {
                if !removed[u] && !seen.contains_key(&u) {
                    seen.insert(u, true);
                    part.push(u);
                }
            }
        }
        part.sort_unstable();
        out.push(part);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lso::verify_rooted;
    use crate::metric::{graph_metric, Metric};

    fn path(n: usize) -> WeightedGraph {
        WeightedGraph::new(n, (1..n).map(|i| (i - 1, i, 1.0)).collect()).unwrap()
    }

    #[test]
    fn path_of_three_has_middle_centroid() {
        let fam = build_rooted_lso_tree(&path(3)).unwrap();
        let first = &fam.orderings()[0];
        assert_eq!(first.root(), Some(1));
        assert_eq!(first.perm(), &[1, 0, 2]);
        assert_eq!(fam.len(), 1);
    }

    #[test]
    fn single_vertex_tree() {
        let g = WeightedGraph::new(1, vec![]).unwrap();
        let fam = build_rooted_lso_tree(&g).unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(fam.orderings()[0].perm(), &[0]);
    }

    #[test]
    fn non_tree_is_rejected() {
        let g = WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert!(matches!(build_rooted_lso_tree(&g), Err(Error::NotATree(_))));
    }

    #[test]
    fn path_family_verifies_exactly() {
        let g = path(20);
        let fam = build_rooted_lso_tree(&g).unwrap();
        let m = graph_metric(&g).unwrap();
        let r = verify_rooted(&fam, &m).unwrap();
        assert!(r.passed());
        assert_eq!(r.max_stretch, 1.0);
        assert!(fam.memberships().iter().all(|&c| c <= 5));
    }

    #[test]
    fn decomposition_axioms_are_named() {
        let g = path(3);
        let missing_edge = TreeDecomposition {
            n: 3,
            bags: vec![vec![0, 1], vec![2]],
            edges: vec![(0, 1)],
        };
        let e = missing_edge.validate(&g).unwrap_err();
        assert!(matches!(e, Error::InvalidDecomposition { ref axiom } if axiom.starts_with("edge coverage")));

        let broken = TreeDecomposition {
            n: 3,
            bags: vec![vec![0, 1], vec![2, 1], vec![1, 0]],
            edges: vec![(0, 1), (1, 2)],
        };
        let e = broken.validate(&g).unwrap_err();
        assert!(matches!(e, Error::InvalidDecomposition { ref axiom } if axiom.starts_with("running intersection")));
    }

    #[test]
    fn path_decomposition_of_a_path() {
        let g = path(6);
        let td = TreeDecomposition {
            n: 6,
            bags: (0..5).map(|i| vec![i, i + 1]).collect(),
            edges: (1..5).map(|i| (i - 1, i)).collect(),
        };
        let lso = build_rooted_lso_treewidth(&g, &td).unwrap();
        let m = graph_metric(&g).unwrap();
        assert!(verify_rooted(&lso.family, &m).unwrap().passed());
        for u in 0..6 {
            for v in 0..6 {
                if u == v {
                    continue;
                }
                let ok = lso.separating_orderings(u, v).any(|s| {
                    let o = &lso.family.orderings()[s];
                    let r = o.root().unwrap();
                    o.contains(u) && o.contains(v) && m.dist(u, r) + m.dist(r, v) == m.dist(u, v)
                });
                assert!(ok, "pair ({u}, {v})");
            }
        }
    }
}
