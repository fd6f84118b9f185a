mod common;

use std::collections::{BTreeSet, HashSet};

use lso_core::datasets::{grid_graph, random_tree};
use lso_core::euclid::{build_triangle_lso_resampled, max_stretch_setting, TriangleLsoParams};
use lso_core::hst::Hst;
use lso_core::lso::{build_rooted_lso_tree, build_rooted_lso_treewidth, OrderingFamily};
use lso_core::metric::{graph_metric, LpSpace, Metric, Norm};
use lso_core::nns::*;
use lso_core::rng::rng_for;
use lso_core::Error;
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::Rng;

#[test]
fn predecessor_basics() {
    let mut s = PredecessorSet::new(16).unwrap();
    assert_eq!(s.predecessor(5), None);
    assert_eq!(s.successor(5), None);
    assert_eq!(s.min(), None);
    s.insert(3).unwrap();
    s.insert(7).unwrap();
    assert_eq!((s.predecessor(5), s.successor(5)), (Some(3), Some(7)));
    // both queries include q itself
    assert_eq!((s.predecessor(7), s.successor(3)), (Some(7), Some(3)));
    assert!(s.insert(16).is_err());
    assert!(s.remove(16).is_err());
}

#[test]
fn predecessor_fuzz_against_sorted_oracle() {
    let universe = 1 << 20;
    let mut s = PredecessorSet::new(universe).unwrap();
    let mut oracle = BTreeSet::new();
    let mut rng = rng_for(3, "pred-fuzz", 0);
    // keep the set small sometimes so the minimum moves a lot
    let mut hot = 0..0;
    for step in 0..100_000 {
        if step % 10_000 == 0 {
            let lo = rng.random_range(0..universe - 4096);
            hot = lo..lo + 4096;
        }
        let x = if rng.random_bool(0.8) {
            rng.random_range(hot.clone())
        } else {
            rng.random_range(0..universe)
        };
        match rng.random_range(0..5) {
            0 | 1 => assert_eq!(s.insert(x).unwrap(), oracle.insert(x)),
            2 => assert_eq!(s.remove(x).unwrap(), oracle.remove(&x)),
            3 => {
                assert_eq!(s.predecessor(x), oracle.range(..=x).next_back().copied());
                assert_eq!(s.successor(x), oracle.range(x..).next().copied());
            }
            _ => assert_eq!(s.contains(x), oracle.contains(&x)),
        }
        assert_eq!(s.min(), oracle.first().copied(), "step {step}");
        assert_eq!(s.max(), oracle.last().copied());
    }
    assert!(s.iter().eq(oracle.iter().copied()));
}

proptest! {
    #[test]
    fn predecessor_small_universe(ops in prop::collection::vec((0u8..4, 0usize..300), 1..400)) {
        let mut s = PredecessorSet::new(300).unwrap();
        let mut oracle = BTreeSet::new();
        for (op, x) in ops {
            match op {
                0 | 1 => prop_assert_eq!(s.insert(x).unwrap(), oracle.insert(x)),
                2 => prop_assert_eq!(s.remove(x).unwrap(), oracle.remove(&x)),
                _ => {
                    prop_assert_eq!(s.predecessor(x), oracle.range(..=x).next_back().copied());
                    prop_assert_eq!(s.successor(x), oracle.range(x..).next().copied());
                }
            }
            prop_assert_eq!(s.min(), oracle.first().copied());
        }
    }
}

/// LCA by climbing parent pointers from both nodes.
fn naive_lca(h: &Hst, a: usize, b: usize) -> usize {
    let mut up = HashSet::new();
    let mut v = Some(a);
    while let Some(x) = v {
        up.insert(x);
        v = h.parent(x);
    }
    let mut w = b;
    while !up.contains(&w) {
        w = h.parent(w).unwrap();
    }
    w
}

fn check_lca(h: &Hst) {
    let labels = lca_labels(h);
    let n = h.points();
    let bound = 4 * (usize::BITS - n.leading_zeros()) as usize + 4;
    for x in 0..n {
        let lx = &labels[h.leaf_of(x)];
        assert!(lx.words() <= bound, "{} words", lx.words());
        for y in 0..n {
            let ly = &labels[h.leaf_of(y)];
            let want = naive_lca(h, h.leaf_of(x), h.leaf_of(y));
            assert_eq!(lca_from_labels(lx, ly), (want, h.gamma(want)), "({x},{y})");
        }
    }
}

#[test]
fn lca_two_leaves() {
    let h = Hst::new(vec![5.0, 0.0, 0.0], vec![vec![1, 2], vec![], vec![]], vec![1, 2]).unwrap();
    let labels = lca_labels(&h);
    assert_eq!(lca_from_labels(&labels[1], &labels[2]), (0, 5.0));
}

#[test]
fn lca_caterpillar() {
    let n = 64;
    let inner = n - 1;
    let mut gamma: Vec<f64> = (0..inner).map(|k| (n - k) as f64).collect();
    gamma.extend(std::iter::repeat_n(0.0, n));
    let mut children: Vec<Vec<usize>> = (0..inner)
        .map(|k| {
            if k + 1 < inner {
                vec![inner + k, k + 1]
            } else {
                vec![inner + k, inner + k + 1]
            }
        })
        .collect();
    children.extend(std::iter::repeat_n(Vec::new(), n));
    let leaf_of: Vec<usize> = (0..n).map(|x| inner + x).collect();
    check_lca(&Hst::new(gamma, children, leaf_of).unwrap());
}

#[test]
fn lca_random_hst() {
    check_lca(&common::random_hst(512, 5));
}

#[test]
fn ultrametric_nns_matches_linear_scan() {
    let h = common::random_hst(256, 8);
    let labels = ultrametric_labels(&h);
    let mut rng = rng_for(8, "ultra-nns", 0);
    for _ in 0..1000 {
        let size = rng.random_range(1..=64);
        let set: Vec<usize> = sample(&mut rng, 256, size).into_vec();
        let mut s = UltrametricNns::new(256, UltraStrategy::LcaExact).unwrap();
        for &x in &set {
            s.insert(x, &labels[x]).unwrap();
        }
        let q = rng.random_range(0..256);
        let (id, d) = s.query(&labels[q]).unwrap();
        assert_eq!(d, common::linear_nn(&h, q, &set));
        assert_eq!(d, h.dist(q, id));
        assert!(set.contains(&id));
    }
}

#[test]
fn ultrametric_nns_small_cases() {
    let h = common::random_hst(20, 2);
    let labels = ultrametric_labels(&h);
    let mut s = UltrametricNns::new(20, UltraStrategy::LcaExact).unwrap();
    assert!(matches!(s.query(&labels[0]), Err(Error::Empty)));
    s.insert(4, &labels[4]).unwrap();
    assert_eq!(s.query(&labels[4]).unwrap(), (4, 0.0));
    assert!(matches!(
        UltrametricNns::new(20, UltraStrategy::DistanceLabeling),
        Err(Error::OutOfScope(_))
    ));

    // a star: every other point sits at the root label
    let star = Hst::new(
        vec![3.0, 0.0, 0.0, 0.0, 0.0],
        vec![vec![1, 2, 3, 4], vec![], vec![], vec![], vec![]],
        vec![1, 2, 3, 4],
    )
    .unwrap();
    let labels = ultrametric_labels(&star);
    let mut s = UltrametricNns::new(4, UltraStrategy::LcaExact).unwrap();
    s.insert(2, &labels[2]).unwrap();
    s.insert(3, &labels[3]).unwrap();
    assert_eq!(s.query(&labels[0]).unwrap().1, 3.0);
    s.remove(&labels[2]).unwrap();
    assert_eq!(s.query(&labels[1]).unwrap(), (3, 3.0));
}

/// Random queries against random subsets of a rooted family with ρ = 1; the
/// answer must be a true nearest neighbor.
fn rooted_exact<M: Metric + ?Sized>(fam: &OrderingFamily, m: &M, trials: usize, seed: u64) {
    let n = m.len();
    let labels = rooted_labels(fam, m).unwrap();
    for e in &labels {
        assert!(e.entries.len() <= fam.tau());
    }
    let mut rng = rng_for(seed, "rooted-nns", 0);
    for _ in 0..trials {
        let size = rng.random_range(1..=n);
        let set: Vec<usize> = sample(&mut rng, n, size).into_vec();
        let mut s = RootedNns::new();
        for &x in &set {
            s.insert(x, &labels[x]).unwrap();
        }
        let q = rng.random_range(0..n);
        let (id, est) = s.query(&labels[q]).unwrap();
        let best = common::linear_nn(m, q, &set);
        assert!(set.contains(&id));
        assert!(est >= m.dist(q, id) - 1e-9);
        assert!((m.dist(q, id) - best).abs() <= 1e-9 * best.max(1.0), "q={q}");
    }
}

#[test]
fn rooted_nns_on_trees_is_exact() {
    for seed in 0..4 {
        let g = random_tree(120, seed).unwrap();
        let fam = build_rooted_lso_tree(&g).unwrap();
        rooted_exact(&fam, &graph_metric(&g).unwrap(), 250, seed);
    }
}

#[test]
fn rooted_nns_on_grid_graphs_is_exact() {
    let (g, td) = grid_graph(8, 12).unwrap();
    let lso = build_rooted_lso_treewidth(&g, &td).unwrap();
    rooted_exact(&lso.family, &graph_metric(&g).unwrap(), 1000, 1);
}

#[test]
fn rooted_nns_root_only() {
    let g = random_tree(30, 9).unwrap();
    let fam = build_rooted_lso_tree(&g).unwrap();
    let m = graph_metric(&g).unwrap();
    let labels = rooted_labels(&fam, &m).unwrap();
    let root = fam.orderings()[0].root().unwrap();
    let mut s = RootedNns::new();
    s.insert(root, &labels[root]).unwrap();
    for q in fam.orderings()[0].perm() {
        assert_eq!(s.query(&labels[*q]).unwrap(), (root, m.dist(*q, root)));
    }
}

fn euclid4() -> (LpSpace, OrderingFamily) {
    let ps = common::uniform_points(150, 4, 21);
    let params = TriangleLsoParams::new(Norm::L(2.0), max_stretch_setting(4), 0.5);
    let (fam, out) = build_triangle_lso_resampled(&ps, &params, 4, 5).unwrap();
    assert!(out.report.passed());
    (LpSpace::euclidean(ps), fam)
}

#[test]
fn triangle_nns_within_twice_rho() {
    let (m, fam) = euclid4();
    let n = m.len();
    let labels = triangle_labels(&fam, &m).unwrap();
    let levels = (usize::BITS - n.leading_zeros()) as usize;
    for l in &labels {
        assert!(l.entries.len() <= fam.tau());
        assert!(l.entries.iter().all(|e| e.mids.len() <= levels));
    }
    let bound = 2.0 * fam.rho();
    let mut rng = rng_for(4, "tri-nns", 0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let size = rng.random_range(1..=40);
        let set: Vec<usize> = sample(&mut rng, n, size).into_vec();
        let mut s = TriangleNns::new();
        for &x in &set {
            s.insert(x, &labels[x]).unwrap();
        }
        let q = rng.random_range(0..n);
        let (id, est) = s.query(&labels[q]).unwrap();
        let best = common::linear_nn(&m, q, &set);
        let got = m.dist(q, id);
        assert!(est >= got - 1e-9, "estimate below the true distance");
        assert!(got <= bound * best + 1e-9, "{got} > {bound}·{best}");
        if best > 0.0 {
            worst = worst.max(got / best);
        }
    }
    println!("worst observed ratio {worst:.3} (bound {bound:.3})");
}

#[test]
fn triangle_nns_update_fuzz() {
    let (m, fam) = euclid4();
    let n = m.len();
    let labels = triangle_labels(&fam, &m).unwrap();
    let bound = 2.0 * fam.rho();
    let mut rng = rng_for(5, "tri-fuzz", 0);
    let mut s = TriangleNns::new();
    let mut live = BTreeSet::new();
    assert!(matches!(s.query(&labels[0]), Err(Error::Empty)));
    for step in 0..10_000 {
        let x = rng.random_range(0..n);
        if rng.random_bool(0.5) {
            assert_eq!(s.insert(x, &labels[x]).unwrap(), live.insert(x));
        } else {
            assert_eq!(s.remove(x).unwrap(), live.remove(&x));
        }
        if live.is_empty() {
            continue;
        }
        let q = rng.random_range(0..n);
        let (id, _) = s.query(&labels[q]).unwrap();
        assert!(live.contains(&id), "step {step}: answer {id} not stored");
        let set: Vec<usize> = live.iter().copied().collect();
        let best = common::linear_nn(&m, q, &set);
        assert!(m.dist(q, id) <= bound * best + 1e-9, "step {step}");
        if step % 500 == 0 {
            // a freshly built structure gives the same answer
            let mut fresh = TriangleNns::new();
            for &y in &set {
                fresh.insert(y, &labels[y]).unwrap();
            }
            assert_eq!(fresh.query(&labels[q]).unwrap(), s.query(&labels[q]).unwrap());
        }
    }
}

#[test]
fn rooted_nns_rebuild_equivalence() {
    let g = random_tree(80, 3).unwrap();
    let fam = build_rooted_lso_tree(&g).unwrap();
    let m = graph_metric(&g).unwrap();
    let labels = rooted_labels(&fam, &m).unwrap();
    let mut rng = rng_for(6, "rooted-fuzz", 0);
    let mut s = RootedNns::new();
    let mut live = BTreeSet::new();
    for _ in 0..3000 {
        let x = rng.random_range(0..80);
        if rng.random_bool(0.6) {
            assert_eq!(s.insert(x, &labels[x]).unwrap(), live.insert(x));
        } else {
            assert_eq!(s.remove(x).unwrap(), live.remove(&x));
        }
        if live.is_empty() {
            continue;
        }
        let q = rng.random_range(0..80);
        let mut fresh = RootedNns::new();
        for &y in &live {
            fresh.insert(y, &labels[y]).unwrap();
        }
        assert_eq!(s.query(&labels[q]).unwrap(), fresh.query(&labels[q]).unwrap());
    }
}
