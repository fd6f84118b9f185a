use std::collections::HashMap;
use std::fmt::Write as _;

use super::edges::{compact, EdgeSet, PathReporting};
use crate::error::{Error, Result};
use crate::hop::{midpoint, TwoHopPathSpanner};
use crate::lso::{build_rooted_lso_treewidth, TreeDecomposition};
use crate::metric::{graph_metric, DistanceMatrix, Metric, WeightedGraph, REL_TOL};

/// One node of a shortest path decomposition: a connected component and the
/// shortest path removed from it.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdNode {
    pub level: usize,
    pub parent: Option<usize>,
    /// Free label carried over from the input (the `component c` field).
    pub label: usize,
    /// Vertices of the component, ascending.
    pub vertices: Vec<usize>,
    pub path: Vec<usize>,
}

/// A validated shortest path decomposition of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Spd {
    n: usize,
    nodes: Vec<SpdNode>,
    /// Node whose path contains each vertex.
    home: Vec<usize>,
}

/// One `(level, label, path)` line of an SPD file.
pub type SpdEntry = (usize, usize, Vec<usize>);

fn invalid(level: usize, reason: impl Into<String>) -> Error {
    Error::InvalidSpd {
        level,
        reason: reason.into(),
    }
}

/// Connected components of the subgraph induced by `alive`, each ascending.
fn components(g: &WeightedGraph, alive: &[bool], within: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.len()];
    let mut out = Vec::new();
    for &s in within {
        if seen[s] || !alive[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut k = 0;
        while k < comp.len() {
            let v = comp[k];
            k += 1;
            for &(u, _) in g.neighbors(v) {
                if alive[u] && !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

impl Spd {
    /// Builds the decomposition tree from per-level paths and checks that each
    /// component receives exactly one path, that paths are shortest paths in
    /// their component, and that every vertex is eventually removed.
    pub fn from_paths(g: &WeightedGraph, entries: Vec<SpdEntry>) -> Result<Spd> {
        let n = g.len();
        let max_level = entries.iter().map(|e| e.0).max().unwrap_or(0);
        let mut by_level: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); max_level + 1];
        for (level, label, path) in entries {
            by_level[level].push((label, path));
        }
        let everything: Vec<usize> = (0..n).collect();
        let alive_all = vec![true; n];
        // (vertices, parent node) awaiting a path
        let mut pending: Vec<(Vec<usize>, Option<usize>)> = components(g, &alive_all, &everything)
            .into_iter()
            .map(|c| (c, None))
            .collect();
        let mut nodes: Vec<SpdNode> = Vec::new();
        let mut home = vec![usize::MAX; n];
        let mut level = 0;
        while !pending.is_empty() {
            let lines = by_level.get_mut(level).map(std::mem::take).unwrap_or_default();
            let mut comp_of = vec![usize::MAX; n];
            for (c, (vs, _)) in pending.iter().enumerate() {
                for &v in vs {
                    comp_of[v] = c;
                }
            }
            let mut assigned: Vec<Option<usize>> = vec![None; pending.len()];
            for (label, path) in lines {
                let Some(&first) = path.first() else {
                    return Err(invalid(level, "empty path"));
                };
                if first >= n {
                    return Err(invalid(level, format!("unknown vertex {first}")));
                }
                let c = comp_of[first];
                if c == usize::MAX {
                    return Err(invalid(level, format!("vertex {first} is not in a live component")));
                }
                if assigned[c].is_some() {
                    return Err(invalid(level, format!("two paths in the component of vertex {first}")));
                }
                let mut alive = vec![false; n];
                for &v in &pending[c].0 {
                    alive[v] = true;
                }
                let mut on_path = vec![false; n];
                let mut length = 0.0;
                for (i, &v) in path.iter().enumerate() {
                    if v >= n || comp_of[v] != c {
                        return Err(invalid(level, format!("path vertex {v} leaves its component")));
                    }
                    if on_path[v] {
                        return Err(invalid(level, format!("path repeats vertex {v}")));
                    }
                    on_path[v] = true;
                    if i > 0 {
                        let u = path[i - 1];
                        let w = g
                            .neighbors(u)
                            .iter()
                            .filter(|e| e.0 == v)
                            .map(|e| e.1)
                            .fold(f64::INFINITY, f64::min);
                        if w.is_infinite() {
                            return Err(invalid(level, format!("path uses a non-edge ({u}, {v})")));
                        }
                        length += w;
                    }
                }
                let last = *path.last().expect("nonempty");
                let shortest = g.dijkstra(first, Some(&alive))[last];
                if length > shortest * (1.0 + REL_TOL) + REL_TOL {
                    return Err(invalid(
                        level,
                        format!("path {first}…{last} has length {length}, shortest is {shortest}"),
                    ));
                }
                assigned[c] = Some(nodes.len());
                for &v in &path {
                    home[v] = nodes.len();
                }
                nodes.push(SpdNode {
                    level,
                    parent: pending[c].1,
                    label,
                    vertices: pending[c].0.clone(),
                    path,
                });
            }
            let mut next = Vec::new();
            for (c, (vs, _)) in pending.iter().enumerate() {
                let Some(id) = assigned[c] else {
                    return Err(invalid(level, format!("component of vertex {} has no path", vs[0])));
                };
                let mut alive = vec![false; n];
                for &v in vs {
                    alive[v] = true;
                }
                for &v in &nodes[id].path {
                    alive[v] = false;
                }
                next.extend(components(g, &alive, vs).into_iter().map(|sub| (sub, Some(id))));
            }
            pending = next;
            level += 1;
        }
        if let Some(extra) = by_level.iter().position(|l| !l.is_empty()) {
            return Err(invalid(extra, "path given after its components were exhausted"));
        }
        Ok(Spd { n, nodes, home })
    }

    pub fn nodes(&self) -> &[SpdNode] {
        &self.nodes
    }

    pub fn points(&self) -> usize {
        self.n
    }

    /// Number of levels.
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|x| x.level + 1).max().unwrap_or(0)
    }

    /// Node whose path removes `v`.
    pub fn home(&self, v: usize) -> usize {
        self.home[v]
    }

    /// Deepest node whose component contains both vertices.
    pub fn meet(&self, u: usize, v: usize) -> usize {
        let (mut a, mut b) = (self.home[u], self.home[v]);
        while a != b {
            if self.nodes[a].level >= self.nodes[b].level {
                a = self.nodes[a].parent.expect("shared root");
            } else {
                b = self.nodes[b].parent.expect("shared root");
            }
        }
        a
    }

    pub fn entries(&self) -> Vec<SpdEntry> {
        self.nodes.iter().map(|x| (x.level, x.label, x.path.clone())).collect()
    }

    /// Text form, one `level i: path v₁ … v_m @ component c` line per node.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for x in &self.nodes {
            let path: Vec<String> = x.path.iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "level {}: path {} @ component {}", x.level, path.join(" "), x.label);
        }
        s
    }
}

/// Parses SPD lines `level i: path v₁ … v_m @ component c`; blank lines and
/// `#` comments are skipped.
pub fn parse_spd(text: &str) -> Result<Vec<SpdEntry>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::InvalidParameter(format!("line {}: expected `level i: path … @ component c`", no + 1));
        let rest = line.strip_prefix("level").ok_or_else(bad)?;
        let (lvl, rest) = rest.split_once(':').ok_or_else(bad)?;
        let level: usize = lvl.trim().parse().map_err(|_| bad())?;
        let rest = rest.trim().strip_prefix("path").ok_or_else(bad)?;
        let (path, comp) = rest.split_once('@').ok_or_else(bad)?;
        let label: usize = comp
            .trim()
            .strip_prefix("component")
            .ok_or_else(bad)?
            .trim()
            .parse()
            .map_err(|_| bad())?;
        let path: Vec<usize> = path
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        out.push((level, label, path));
    }
    Ok(out)
}

/// Heavy-path SPD of a forest: each component is rooted at its smallest
/// vertex and the path runs from the root down heavy children. Every
/// remaining subtree has at most half the vertices, so the depth is at most
/// `⌊log₂ n⌋ + 1`.
pub fn heavy_path_spd(tree: &WeightedGraph) -> Result<Spd> {
    let n = tree.len();
    if tree.edges().len() >= n {
        return Err(Error::NotATree(format!("{} edges on {n} vertices", tree.edges().len())));
    }
    let all: Vec<usize> = (0..n).collect();
    let mut entries = Vec::new();
    let mut alive = vec![true; n];
    let mut stack: Vec<(Vec<usize>, usize)> = components(tree, &alive, &all).into_iter().map(|c| (c, 0)).collect();
    let mut label = vec![0usize; 0];
    while let Some((comp, level)) = stack.pop() {
        let root = comp[0];
        // BFS order and parents within the live component
        let mut parent = HashMap::from([(root, usize::MAX)]);
        let mut order = vec![root];
        let mut k = 0;
        while k < order.len() {
            let v = order[k];
            k += 1;
            for &(u, _) in tree.neighbors(v) {
                if alive[u] && !parent.contains_key(&u) {
                    parent.insert(u, v);
                    order.push(u);
                }
            }
        }
        let mut size: HashMap<usize, usize> = order.iter().map(|&v| (v, 1)).collect();
        let mut heavy: HashMap<usize, usize> = HashMap::new();
        for &v in order.iter().rev() {
            let p = parent[&v];
            if p != usize::MAX {
                let s = size[&v];
                *size.get_mut(&p).expect("visited") += s;
                let best = heavy.entry(p).or_insert(v);
                if (size[best], std::cmp::Reverse(*best)) < (s, std::cmp::Reverse(v)) {
                    *best = v;
                }
            }
        }
        let mut path = vec![root];
        while let Some(&c) = heavy.get(path.last().expect("nonempty")) {
            path.push(c);
        }
        for &v in &path {
            alive[v] = false;
        }
        if label.len() <= level {
            label.resize(level + 1, 0);
        }
        entries.push((level, label[level], path));
        label[level] += 1;
        stack.extend(components(tree, &alive, &comp).into_iter().map(|c| (c, level + 1)));
    }
    Spd::from_paths(tree, entries)
}

/// SPD from a tree decomposition: the vertices of the balanced separator
/// bags are removed one at a time as single-vertex paths, in the order the
/// separator recursion deletes them.
pub fn treewidth_spd(g: &WeightedGraph, td: &TreeDecomposition) -> Result<Spd> {
    let lso = build_rooted_lso_treewidth(g, td)?;
    let n = g.len();
    let rank: Vec<(usize, usize, usize)> = (0..n)
        .map(|v| (lso.clusters[lso.home[v]].depth, lso.home[v], v))
        .collect();
    let all: Vec<usize> = (0..n).collect();
    let mut alive = vec![true; n];
    let mut entries = Vec::new();
    let mut label = Vec::new();
    let mut stack: Vec<(Vec<usize>, usize)> = components(g, &alive, &all).into_iter().map(|c| (c, 0)).collect();
    while let Some((comp, level)) = stack.pop() {
        let v = *comp.iter().min_by_key(|&&v| rank[v]).expect("nonempty component");
        alive[v] = false;
        if label.len() <= level {
            label.resize(level + 1, 0);
        }
        entries.push((level, label[level], vec![v]));
        label[level] += 1;
        stack.extend(components(g, &alive, &comp).into_iter().map(|c| (c, level + 1)));
    }
    Spd::from_paths(g, entries)
}

/// Landmarks of one vertex on one path: `(position, d_C(v, P[position]))`,
/// ascending by position.
type Landmarks = Vec<(usize, f64)>;

struct SpdLevel {
    path: Vec<usize>,
    landmarks: HashMap<usize, Landmarks>,
}

/// 2-hop `(1+ε)`-spanner of a graph with a shortest path decomposition.
///
/// For every node with component `C` and path `P`, each `v ∈ C` keeps
/// landmarks `L_v ⊆ P` such that every `x ∈ P` has some `l ∈ L_v` with
/// `d_C(v,l) + d_P(l,x) ≤ (1+ε)·d_C(v,x)`. Then `v` is joined to the
/// responsible midpoints of every landmark in the 2-hop path spanner on `P`.
/// A query visits the nodes whose component holds both endpoints, tries the
/// landmark pairs adjacent in path order and returns the lightest path
/// through their midpoint.
pub struct SpdSpanner {
    eps: f64,
    spd: Spd,
    levels: Vec<SpdLevel>,
    dist: DistanceMatrix,
    edges: EdgeSet,
}

pub fn spd_spanner(g: &WeightedGraph, spd: &Spd, eps: f64) -> Result<SpdSpanner> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("ε must be positive, got {eps}")));
    }
    if spd.points() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: g.len(),
            got: spd.points(),
        });
    }
    let n = g.len();
    let dist = graph_metric(g)?;
    let mut edges = EdgeSet::new(n);
    let mut levels = Vec::with_capacity(spd.nodes().len());
    for node in spd.nodes() {
        let mut alive = vec![false; n];
        for &v in &node.vertices {
            alive[v] = true;
        }
        let path = &node.path;
        let from_path: Vec<Vec<f64>> = path.iter().map(|&p| g.dijkstra(p, Some(&alive))).collect();
        // prefix lengths along P
        let mut along = vec![0.0; path.len()];
        for i in 1..path.len() {
            along[i] = along[i - 1] + from_path[i - 1][path[i]];
        }
        let hop = TwoHopPathSpanner::new(path.len())?;
        let mut landmarks = HashMap::with_capacity(node.vertices.len());
        for &v in &node.vertices {
            let mut order: Vec<usize> = (0..path.len()).collect();
            order.sort_by(|&a, &b| from_path[a][v].total_cmp(&from_path[b][v]).then(a.cmp(&b)));
            let mut chosen: Landmarks = Vec::new();
            for x in order {
                let dx = from_path[x][v];
                let covered = chosen
                    .iter()
                    .any(|&(l, dl)| dl + (along[l] - along[x]).abs() <= (1.0 + eps) * dx);
                if !covered {
                    chosen.push((x, dx));
                }
            }
            chosen.sort_by_key(|c| c.0);
            for &(a, _) in &chosen {
                edges.add(&dist, v, path[a]);
                for m in hop.responsible(a + 1)? {
                    edges.add(&dist, v, path[m - 1]);
                }
            }
            landmarks.insert(v, chosen);
        }
        levels.push(SpdLevel {
            path: path.clone(),
            landmarks,
        });
    }
    Ok(SpdSpanner {
        eps,
        spd: spd.clone(),
        levels,
        dist,
        edges,
    })
}

impl SpdSpanner {
    pub fn spd(&self) -> &Spd {
        &self.spd
    }

    /// Largest landmark set over all (vertex, node) pairs.
    pub fn max_landmarks(&self) -> usize {
        self.levels
            .iter()
            .flat_map(|l| l.landmarks.values().map(Vec::len))
            .max()
            .unwrap_or(0)
    }

    /// Best path and the number of candidate pairs inspected.
    pub fn path_with_candidates(&self, u: usize, v: usize) -> Result<(Vec<usize>, usize)> {
        if u == v {
            return Ok((vec![u], 0));
        }
        let mut node = Some(self.spd.meet(u, v));
        let mut best: Option<(f64, usize)> = None;
        let mut inspected = 0;
        while let Some(id) = node {
            let lvl = &self.levels[id];
            let (lu, lv) = (&lvl.landmarks[&u], &lvl.landmarks[&v]);
            // merge by position; candidates are adjacent pairs from different sides
            let (mut i, mut j) = (0, 0);
            let mut last: Option<(usize, bool)> = None;
            while i < lu.len() || j < lv.len() {
                let take_u = j >= lv.len() || (i < lu.len() && lu[i].0 <= lv[j].0);
                let (pos, side) = if take_u {
                    i += 1;
                    (lu[i - 1].0, true)
                } else {
                    j += 1;
                    (lv[j - 1].0, false)
                };
                if let Some((prev, prev_side)) = last {
                    if prev_side != side {
                        inspected += 1;
                        let z = lvl.path[midpoint(prev.min(pos) + 1, prev.max(pos) + 1) - 1];
                        let w = self.dist.dist(u, z) + self.dist.dist(z, v);
                        if best.is_none_or(|b| (w, z) < b) {
                            best = Some((w, z));
                        }
                    }
                }
                last = Some((pos, side));
            }
            node = self.spd.nodes()[id].parent;
        }
        let (_, z) = best.ok_or_else(|| Error::NoPath(format!("no landmark pair for {u} and {v}")))?;
        Ok((compact(vec![u, z, v]), inspected))
    }
}

impl PathReporting for SpdSpanner {
    fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    fn stretch(&self) -> f64 {
        1.0 + self.eps
    }

    fn hops(&self) -> usize {
        2
    }

    fn path(&self, u: usize, v: usize) -> Result<Vec<usize>> {
        self.path_with_candidates(u, v).map(|p| p.0)
    }
}
