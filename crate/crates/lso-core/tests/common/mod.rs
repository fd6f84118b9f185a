#![allow(dead_code)]

use lso_core::hst::Hst;
use lso_core::metric::{LpSpace, Metric, PointSet};
use lso_core::rng::rng_for;
use rand::Rng;

/// Random HST over `n` points: internal nodes split their points into
/// 2..=4 random groups, labels shrink by a random factor in [1, 3) per level.
pub fn random_hst(n: usize, seed: u64) -> Hst {
    let mut rng = rng_for(seed, "test-hst", 0);
    let mut gamma = Vec::new();
    let mut children = Vec::new();
    let mut leaf_of = vec![0; n];
    let mut points: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        points.swap(i, rng.random_range(0..=i));
    }
    fn grow(
        pts: &[usize],
        label: f64,
        rng: &mut impl Rng,
        gamma: &mut Vec<f64>,
        children: &mut Vec<Vec<usize>>,
        leaf_of: &mut [usize],
    ) -> usize {
        let v = gamma.len();
        if pts.len() == 1 {
            gamma.push(0.0);
            children.push(Vec::new());
            leaf_of[pts[0]] = v;
            return v;
        }
        gamma.push(label);
        children.push(Vec::new());
        let parts = rng.random_range(2..=4usize).min(pts.len());
        let mut cuts: Vec<usize> = (1..pts.len()).collect();
        for i in (1..cuts.len()).rev() {
            cuts.swap(i, rng.random_range(0..=i));
        }
        let mut cuts: Vec<usize> = cuts[..parts - 1].to_vec();
        cuts.sort_unstable();
        cuts.insert(0, 0);
        cuts.push(pts.len());
        for w in cuts.windows(2) {
            let child_label = label / rng.random_range(1.0..3.0);
            let c = grow(&pts[w[0]..w[1]], child_label, rng, gamma, children, leaf_of);
            children[v].push(c);
        }
        v
    }
    grow(&points, 100.0, &mut rng, &mut gamma, &mut children, &mut leaf_of);
    Hst::new(gamma, children, leaf_of).expect("valid HST")
}

pub fn uniform_points(n: usize, d: usize, seed: u64) -> PointSet {
    lso_core::datasets::uniform_cube(n, d, seed).unwrap()
}

pub fn euclidean(n: usize, d: usize, seed: u64) -> LpSpace {
    LpSpace::euclidean(uniform_points(n, d, seed))
}

/// Nearest point of `set` to `q` by linear scan.
pub fn linear_nn<M: Metric + ?Sized>(m: &M, q: usize, set: &[usize]) -> f64 {
    set.iter().map(|&y| m.dist(q, y)).fold(f64::INFINITY, f64::min)
}

/// Points on the real line as a 1-D point set.
pub fn line(xs: &[f64]) -> LpSpace {
    LpSpace::euclidean(PointSet::new(xs.iter().map(|&x| vec![x]).collect()).unwrap())
}
