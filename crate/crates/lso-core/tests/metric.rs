mod common;

use lso_core::metric::*;
use lso_core::rng::rng_for;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn lp_examples() {
    let (x, y) = ([1.0, 1.0], [0.0, 0.0]);
    assert_eq!(lp_distance(&y, &y, Norm::L(2.0)).unwrap(), 0.0);
    assert_eq!(lp_distance(&x, &y, Norm::L(1.0)).unwrap(), 2.0);
    assert!((lp_distance(&x, &y, Norm::L(2.0)).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(lp_distance(&x, &y, Norm::Inf).unwrap(), 1.0);
}

proptest! {
    #[test]
    fn l1_and_l2_compare_in_dimension_eight(x in prop::collection::vec(-10.0f64..10.0, 8), y in prop::collection::vec(-10.0f64..10.0, 8)) {
        let l1: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        let l2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        prop_assert!((lp_distance(&x, &y, Norm::L(1.0)).unwrap() - l1).abs() <= 1e-12 * l1.max(1.0));
        prop_assert!((lp_distance(&x, &y, Norm::L(2.0)).unwrap() - l2).abs() <= 1e-12 * l2.max(1.0));
        prop_assert!(l2 <= l1 * (1.0 + 1e-12));
        prop_assert!(l1 <= 8f64.sqrt() * l2 * (1.0 + 1e-12));
    }

    #[test]
    fn distance_extent_matches_scan(seed in 0u64..1000, n in 2usize..30) {
        let m = common::euclidean(n, 3, seed);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    lo = lo.min(m.dist(i, j));
                    hi = hi.max(m.dist(i, j));
                }
            }
        }
        prop_assert_eq!(distance_extent(&m), Some((lo, hi)));
        prop_assert_eq!(aspect_ratio(&m).unwrap(), hi / lo);
    }
}

#[test]
fn graph_distances_small_cases() {
    let g = WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
    assert_eq!(graph_metric(&g).unwrap().dist(0, 2), 2.0);
    let single = WeightedGraph::new(1, vec![]).unwrap();
    assert_eq!(graph_metric(&single).unwrap().dist(0, 0), 0.0);
}

#[test]
fn dijkstra_matches_relaxation_oracle() {
    for seed in 0..10 {
        let g = lso_core::datasets::random_graph(20, 15, seed).unwrap();
        // Bellman-Ford style relaxation until nothing changes
        let mut d = vec![vec![f64::INFINITY; 20]; 20];
        for (s, row) in d.iter_mut().enumerate() {
            row[s] = 0.0;
            let mut changed = true;
            while changed {
                changed = false;
                for &(u, v, w) in g.edges() {
                    for (a, b) in [(u, v), (v, u)] {
                        if row[a] + w < row[b] {
                            row[b] = row[a] + w;
                            changed = true;
                        }
                    }
                }
            }
        }
        let m = graph_metric(&g).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                assert_eq!(m.dist(i, j), d[i][j]);
            }
        }
    }
}

#[test]
fn nets_cover_and_pack() {
    let one = common::line(&[3.0]);
    assert_eq!(build_epsilon_net(&one, 5.0).unwrap(), vec![0]);
    let two = common::line(&[0.0, 1.0]);
    assert_eq!(build_epsilon_net(&two, 2.0).unwrap().len(), 1);

    let m = common::euclidean(100, 2, 11);
    let net = build_epsilon_net(&m, 0.3).unwrap();
    for (a, &x) in net.iter().enumerate() {
        for &y in &net[a + 1..] {
            assert!(m.dist(x, y) >= 0.3);
        }
    }
    for p in 0..100 {
        assert!(net.iter().any(|&c| m.dist(p, c) < 0.3));
    }
}

#[test]
fn aspect_ratio_examples() {
    let two = common::line(&[0.0, 5.0]);
    assert_eq!(aspect_ratio(&two).unwrap(), 1.0);
    let pts = PointSet::new(vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap();
    let l1 = LpSpace::new(pts, Norm::L(1.0)).unwrap();
    assert_eq!(aspect_ratio(&l1).unwrap(), 3.0);
}

#[test]
fn random_metric_passes_sampled_axiom_check() {
    let m = lso_core::datasets::random_metric(60, 1).unwrap();
    let mut rng = rng_for(2, "t", 0);
    assert!(check_metric_axioms(&m, 100_000, rng.random()).is_ok());
}
