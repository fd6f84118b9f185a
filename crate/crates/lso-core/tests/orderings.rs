mod common;

use lso_core::datasets::{grid_graph, random_metric, random_tree};
use lso_core::lso::*;
use lso_core::metric::{graph_metric, LpSpace, Metric, Norm, PointSet, WeightedGraph};
use lso_core::rng::rng_for;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn family(kind: LsoKind, n: usize, rho: f64, perms: Vec<Vec<usize>>) -> OrderingFamily {
    OrderingFamily::new(kind, n, rho, perms.into_iter().map(|p| (None, p)).collect()).unwrap()
}

#[test]
fn two_points_always_pass() {
    let m = common::line(&[0.0, 4.0]);
    let r = verify_classic(&family(LsoKind::Classic, 2, 0.0, vec![vec![1, 0]]), &m).unwrap();
    assert!(r.passed());
}

#[test]
fn collinear_window_by_hand() {
    let pts = PointSet::new(vec![vec![0.0], vec![1.0], vec![2.0], vec![10.0]]).unwrap();
    let m = LpSpace::new(pts, Norm::L(1.0)).unwrap();
    let r = verify_classic(&family(LsoKind::Classic, 4, 0.3, vec![vec![0, 1, 2, 3]]), &m).unwrap();
    // Pairs with an empty window pass. (0,10): both inner points are within
    // 3 of 0. (1,10): 2 is within 2.7 of 1. (0,2): 1 is at distance 1 > 0.6
    // from both ends.
    let bad: Vec<(usize, usize)> = r.violations.iter().map(|v| (v.x, v.y)).collect();
    assert_eq!(bad, vec![(0, 2)]);
    assert_eq!(r.violations[0].best, 0.5);
}

#[test]
fn sorted_reals_pass_at_one() {
    let xs: Vec<f64> = (0..30).map(|i| (i as f64).powf(1.3)).collect();
    let m = common::line(&xs);
    let id: Vec<usize> = (0..30).collect();
    assert!(verify_classic(&family(LsoKind::Classic, 30, 1.0, vec![id.clone()]), &m)
        .unwrap()
        .passed());
    assert!(verify_triangle(&family(LsoKind::Triangle, 30, 1.0, vec![id]), &m)
        .unwrap()
        .passed());
}

#[test]
fn adjacent_pairs_have_unit_ratio() {
    let m = random_metric(12, 3).unwrap();
    let mut perm: Vec<usize> = (0..12).collect();
    perm.shuffle(&mut rng_for(1, "t", 0));
    let fam = family(LsoKind::Triangle, 12, 1.0, vec![perm.clone()]);
    let table = window_diameter_table(&perm, &m);
    for k in 0..11 {
        let (x, y) = (perm[k], perm[k + 1]);
        assert_eq!(table[k * 12 + k + 1], m.dist(x, y));
    }
    let r = verify_triangle(&fam, &m).unwrap();
    assert!(r
        .violations
        .iter()
        .all(|v| !(perm.windows(2).any(|w| (w[0].min(w[1]), w[0].max(w[1])) == (v.x, v.y)))));
}

#[test]
fn uniform_metric_any_ordering() {
    let m = lso_core::metric::DistanceMatrix::from_rows(
        (0..9)
            .map(|i| (0..9).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect(),
    )
    .unwrap();
    let r = verify_triangle(
        &family(LsoKind::Triangle, 9, 1.0, vec![vec![4, 2, 8, 0, 1, 3, 7, 6, 5]]),
        &m,
    )
    .unwrap();
    assert!(r.passed());
    assert_eq!(r.max_stretch, 1.0);
}

fn star(leaves: usize) -> WeightedGraph {
    WeightedGraph::new(leaves + 1, (1..=leaves).map(|v| (0, v, v as f64)).collect()).unwrap()
}

#[test]
fn star_rooted_at_hub() {
    let g = star(6);
    let m = graph_metric(&g).unwrap();
    let fam = OrderingFamily::new(LsoKind::Rooted, 7, 1.0, vec![(Some(0), (0..7).collect())]).unwrap();
    let r = verify_rooted(&fam, &m).unwrap();
    assert!(r.passed());
    assert_eq!(r.max_stretch, 1.0);
}

#[test]
fn pair_without_shared_ordering_is_infinite() {
    let m = common::line(&[0.0, 1.0, 2.0]);
    let fam = OrderingFamily::new(LsoKind::Rooted, 3, 1.0, vec![(Some(0), vec![0, 1]), (Some(2), vec![2])]).unwrap();
    let r = verify_rooted(&fam, &m).unwrap();
    assert!(r
        .violations
        .iter()
        .any(|v| (v.x, v.y) == (0, 2) && v.best.is_infinite()));
}

#[test]
fn tree_families_are_exact() {
    let single = WeightedGraph::new(2, vec![(0, 1, 3.0)]).unwrap();
    let fam = build_rooted_lso_tree(&single).unwrap();
    assert_eq!(fam.len(), 1);
    assert!(verify_rooted(&fam, &graph_metric(&single).unwrap()).unwrap().passed());

    let path = WeightedGraph::new(8, (0..7).map(|i| (i, i + 1, 1.0)).collect()).unwrap();
    let fam = build_rooted_lso_tree(&path).unwrap();
    assert!(fam.memberships().iter().all(|&c| c <= 3), "{:?}", fam.memberships());

    for (n, seed) in [(64, 1), (100, 2)] {
        let g = random_tree(n, seed).unwrap();
        let fam = build_rooted_lso_tree(&g).unwrap();
        let r = verify_rooted(&fam, &graph_metric(&g).unwrap()).unwrap();
        assert!(r.passed() && r.max_stretch <= 1.0 + 1e-12);
    }
}

/// Width-1 decomposition: one bag per edge, joined along the tree.
fn edge_decomposition(g: &WeightedGraph) -> TreeDecomposition {
    let n = g.len();
    let mut up_edge = vec![None; n];
    let bags: Vec<Vec<usize>> = g.edges().iter().map(|&(u, v, _)| vec![u.min(v), u.max(v)]).collect();
    // random_tree hangs each vertex from an earlier one
    for (b, &(u, v, _)) in g.edges().iter().enumerate() {
        up_edge[u.max(v)] = Some(b);
    }
    let edges = g
        .edges()
        .iter()
        .enumerate()
        .filter_map(|(b, &(u, v, _))| up_edge[u.min(v)].map(|p| (p, b)))
        .collect::<Vec<_>>();
    // bags hanging from the root are chained together
    let root_bags: Vec<usize> = (0..bags.len()).filter(|&b| bags[b][0] == 0).collect();
    let mut edges = edges;
    edges.extend(root_bags.windows(2).map(|w| (w[0], w[1])));
    TreeDecomposition { n, bags, edges }
}

#[test]
fn treewidth_families_are_exact() {
    let g = random_tree(40, 5).unwrap();
    let td = edge_decomposition(&g);
    td.validate(&g).unwrap();
    let tw = build_rooted_lso_treewidth(&g, &td).unwrap();
    assert!(verify_rooted(&tw.family, &graph_metric(&g).unwrap()).unwrap().passed());

    let (g, td) = grid_graph(4, 4).unwrap();
    assert_eq!(td.width(), 4);
    let tw = build_rooted_lso_treewidth(&g, &td).unwrap();
    let r = verify_rooted(&tw.family, &graph_metric(&g).unwrap()).unwrap();
    assert!(r.passed() && r.max_stretch <= 1.0 + 1e-12);
}

#[test]
fn clique_in_one_bag() {
    let k = 6;
    let mut edges = Vec::new();
    for u in 0..k {
        for v in u + 1..k {
            edges.push((u, v, 1.0 + (u + v) as f64));
        }
    }
    let g = WeightedGraph::new(k, edges).unwrap();
    let td = TreeDecomposition {
        n: k,
        bags: vec![(0..k).collect()],
        edges: vec![],
    };
    let tw = build_rooted_lso_treewidth(&g, &td).unwrap();
    let mut roots: Vec<usize> = tw.family.orderings().iter().map(|o| o.root().unwrap()).collect();
    roots.sort_unstable();
    assert_eq!(roots, (0..k).collect::<Vec<_>>());
    assert!(verify_rooted(&tw.family, &graph_metric(&g).unwrap()).unwrap().passed());
}

/// Best window stretch per pair, scanning every window directly.
fn naive_triangle(fam: &OrderingFamily, m: &dyn Metric) -> Vec<f64> {
    let n = fam.universe();
    let mut best = vec![f64::INFINITY; n * n];
    for o in fam.orderings() {
        let p = o.perm();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let mut diam = 0.0f64;
                for a in i..=j {
                    for b in a + 1..=j {
                        diam = diam.max(m.dist(p[a], p[b]));
                    }
                }
                let (x, y) = (p[i].min(p[j]), p[i].max(p[j]));
                best[x * n + y] = best[x * n + y].min(diam / m.dist(x, y));
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn window_dp_matches_naive(seed in 0u64..10_000, n in 2usize..=40, count in 1usize..4, rho in 1.0f64..4.0) {
        let m = common::euclidean(n, 2, seed);
        let mut rng = rng_for(seed, "perm", 0);
        let perms: Vec<Vec<usize>> = (0..count).map(|_| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng);
            p
        }).collect();
        let fam = family(LsoKind::Triangle, n, rho, perms.clone());
        let r = verify_triangle(&fam, &m).unwrap();
        let best = naive_triangle(&fam, &m);
        let mut naive_max = 0.0f64;
        let mut naive_bad = 0;
        for x in 0..n {
            for y in x + 1..n {
                naive_max = naive_max.max(best[x * n + y]);
                if best[x * n + y] > rho * (1.0 + 1e-9) {
                    naive_bad += 1;
                }
            }
        }
        prop_assert!((r.max_stretch - naive_max).abs() <= 1e-12 * naive_max);
        prop_assert_eq!(r.violation_count, naive_bad);
        let table = window_diameter_table(&perms[0], &m);
        for i in 0..n {
            for j in i + 1..n {
                let mut diam = 0.0f64;
                for a in i..=j {
                    for b in a + 1..=j {
                        diam = diam.max(m.dist(perms[0][a], perms[0][b]));
                    }
                }
                prop_assert_eq!(table[i * n + j], diam);
            }
        }
    }

    #[test]
    fn classic_stretch_is_the_best_split(seed in 0u64..10_000, n in 3usize..25) {
        let m = common::euclidean(n, 2, seed);
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut rng_for(seed, "perm", 1));
        let o = Ordering::new(p.clone(), None, n).unwrap();
        for a in 0..n {
            for b in a + 1..n {
                // try every split point of the window
                let mut best = f64::INFINITY;
                for s in a + 1..=b {
                    let pre = p[a + 1..s].iter().map(|&w| m.dist(p[a], w)).fold(0.0, f64::max);
                    let suf = p[s..b].iter().map(|&w| m.dist(p[b], w)).fold(0.0, f64::max);
                    best = best.min(pre.max(suf));
                }
                let want = best / m.dist(p[a], p[b]);
                let got = classic_window_stretch(&o, &m, p[a], p[b]).unwrap();
                prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0));
            }
        }
    }

    #[test]
    fn family_json_round_trip(seed in 0u64..1000, n in 1usize..20, rho in 0.1f64..10.0) {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut rng_for(seed, "perm", 2));
        let fam = family(LsoKind::Triangle, n, rho, vec![p, (0..n).collect()]);
        prop_assert_eq!(OrderingFamily::from_json(&fam.to_json()).unwrap().to_json(), fam.to_json());
    }
}
