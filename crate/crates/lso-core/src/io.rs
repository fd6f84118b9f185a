//! Plain-text file formats. Lines starting with `#` and blank lines are
//! ignored everywhere. Floats are written in Rust's shortest round-trip form.

use std::fmt::Write as _;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lso::TreeDecomposition;
use crate::metric::{DistanceMatrix, Metric, PointSet, WeightedGraph};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn syntax(line: usize, what: &str) -> Error {
    Error::InvalidParameter(format!("line {line}: {what}"))
}

fn num<T: std::str::FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| syntax(line, what))
}

fn join_floats(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// One point per line, whitespace-separated coordinates.
pub fn parse_points(text: &str) -> Result<PointSet> {
    let rows = content_lines(text)
        .map(|(no, l)| {
            l.split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| syntax(no, "expected a decimal coordinate"))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    PointSet::new(rows)
}

pub fn write_points(ps: &PointSet) -> String {
    let mut s = String::new();
    for p in ps.iter() {
        let _ = writeln!(s, "{}", join_floats(p));
    }
    s
}

/// Header `n m`, then `m` lines `u v w` with 0-based endpoints.
pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    let mut lines = content_lines(text);
    let (no, head) = lines.next().ok_or(Error::Empty)?;
    let mut it = head.split_whitespace();
    let n: usize = num(no, it.next(), "header must be `n m`")?;
    let m: usize = num(no, it.next(), "header must be `n m`")?;
    let mut edges = Vec::with_capacity(m);
    for (no, l) in lines {
        let mut it = l.split_whitespace();
        let u = num(no, it.next(), "edge must be `u v w`")?;
        let v = num(no, it.next(), "edge must be `u v w`")?;
        let w = num(no, it.next(), "edge must be `u v w`")?;
        edges.push((u, v, w));
    }
    if edges.len() != m {
        return Err(Error::InvalidGraph(format!(
            "header announces {m} edges, found {}",
            edges.len()
        )));
    }
    WeightedGraph::new(n, edges)
}

pub fn write_graph(g: &WeightedGraph) -> String {
    let mut s = format!("{} {}\n", g.len(), g.edges().len());
    for &(u, v, w) in g.edges() {
        let _ = writeln!(s, "{u} {v} {w}");
    }
    s
}

/// Header `n`, then `n` rows of `n` distances.
pub fn parse_matrix(text: &str) -> Result<DistanceMatrix> {
    let mut lines = content_lines(text);
    let (no, head) = lines.next().ok_or(Error::Empty)?;
    let n: usize = num(no, Some(head), "header must be the point count")?;
    let rows = lines
        .map(|(no, l)| {
            l.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| syntax(no, "expected a decimal distance")))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rows.len(),
        });
    }
    DistanceMatrix::from_rows(rows)
}

pub fn write_matrix<M: Metric + ?Sized>(m: &M) -> String {
    let n = m.len();
    let mut s = format!("{n}\n");
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| m.dist(i, j)).collect();
        let _ = writeln!(s, "{}", join_floats(&row));
    }
    s
}

/// `td <bags> <width+1> <n>`, then `b <id> v…` per bag and `e b1 b2` per
/// bag-tree edge.
pub fn parse_td(text: &str) -> Result<TreeDecomposition> {
    let mut lines = content_lines(text);
    let (no, head) = lines.next().ok_or(Error::Empty)?;
    let mut it = head.split_whitespace();
    if it.next() != Some("td") {
        return Err(syntax(no, "header must be `td <bags> <width+1> <n>`"));
    }
    let nb: usize = num(no, it.next(), "bag count")?;
    let size: usize = num(no, it.next(), "largest bag size")?;
    let n: usize = num(no, it.next(), "vertex count")?;
    let mut bags: Vec<Option<Vec<usize>>> = vec![None; nb];
    let mut edges = Vec::new();
    for (no, l) in lines {
        let mut it = l.split_whitespace();
        match it.next() {
            Some("b") => {
                let id: usize = num(no, it.next(), "bag id")?;
                let vs = it
                    .map(|t| t.parse().map_err(|_| syntax(no, "bag vertex")))
                    .collect::<Result<Vec<usize>>>()?;
                let slot = bags.get_mut(id).ok_or_else(|| syntax(no, "bag id out of range"))?;
                if slot.replace(vs).is_some() {
                    return Err(syntax(no, "bag listed twice"));
                }
            }
            Some("e") => edges.push((num(no, it.next(), "bag edge")?, num(no, it.next(), "bag edge")?)),
            _ => return Err(syntax(no, "expected `b …` or `e …`")),
        }
    }
    let bags = bags
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            b.ok_or_else(|| Error::InvalidDecomposition {
                axiom: format!("bag {i} missing"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let td = TreeDecomposition { n, bags, edges };
    if td.bags.iter().map(Vec::len).max().unwrap_or(0) != size {
        return Err(Error::InvalidDecomposition {
            axiom: format!("header announces bags of size {size}"),
        });
    }
    Ok(td)
}

pub fn write_td(td: &TreeDecomposition) -> String {
    let size = td.bags.iter().map(Vec::len).max().unwrap_or(0);
    let mut s = format!("td {} {} {}\n", td.bags.len(), size, td.n);
    for (i, b) in td.bags.iter().enumerate() {
        let vs: Vec<String> = b.iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "b {i} {}", vs.join(" "));
    }
    for &(a, b) in &td.edges {
        let _ = writeln!(s, "e {a} {b}");
    }
    s
}

/// Label file: one `id kind payload` line per point, the payload in JSON.
pub fn write_labels<L: Serialize>(kind: &str, labels: &[L]) -> Result<String> {
    let mut s = String::new();
    for (id, l) in labels.iter().enumerate() {
        let payload = serde_json::to_string(l).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let _ = writeln!(s, "{id} {kind} {payload}");
    }
    Ok(s)
}

/// Reads a label file written by [`write_labels`]; every line must carry
/// `kind`. Returns labels indexed by id.
pub fn parse_labels<L: DeserializeOwned>(text: &str, kind: &str) -> Result<Vec<L>> {
    let mut out: Vec<Option<L>> = Vec::new();
    for (no, l) in content_lines(text) {
        let mut parts = l.splitn(3, ' ');
        let id: usize = num(no, parts.next(), "label id")?;
        if parts.next() != Some(kind) {
            return Err(syntax(no, &format!("expected label kind `{kind}`")));
        }
        let payload = parts.next().ok_or_else(|| syntax(no, "missing payload"))?;
        let label = serde_json::from_str(payload).map_err(|e| syntax(no, &e.to_string()))?;
        if out.len() <= id {
            out.resize_with(id + 1, || None);
        }
        out[id] = Some(label);
    }
    out.into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| Error::InvalidParameter(format!("label {i} missing"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{grid_graph, random_metric, random_tree, uniform_cube};

    #[test]
    fn formats_round_trip() {
        let ps = uniform_cube(7, 3, 1).unwrap();
        assert_eq!(parse_points(&write_points(&ps)).unwrap(), ps);
        let g = random_tree(9, 2).unwrap();
        assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
        let m = random_metric(6, 3).unwrap();
        assert_eq!(parse_matrix(&write_matrix(&m)).unwrap(), m);
        let (_, td) = grid_graph(3, 2).unwrap();
        assert_eq!(parse_td(&write_td(&td)).unwrap(), td);
    }

    #[test]
    fn comments_and_errors() {
        let ps = parse_points("# two points\n0 1\n\n2 3\n").unwrap();
        assert_eq!(ps.len(), 2);
        assert!(parse_graph("2 2\n0 1 1.5\n").is_err());
        assert!(parse_points("0 x\n").is_err());
        assert!(parse_labels::<Vec<u32>>("0 rooted [1]\n", "triangle").is_err());
        let l: Vec<Vec<u32>> = parse_labels(&write_labels("rooted", &[vec![1u32], vec![]]).unwrap(), "rooted").unwrap();
        assert_eq!(l, vec![vec![1], vec![]]);
    }
}
