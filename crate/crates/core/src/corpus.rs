//! Seeded random weighted colored trees for tests and experiments.

use rand::Rng;

use crate::rational::Rational;
use crate::rng::{seeded, SeededRng};
use crate::tree::{ColorSet, NodeId, TreeSemilattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Uniform,
    /// Integer weights in `0..=10`, normalized; some nodes get weight 0.
    Random,
    /// Random weights on leaves only, zero on internal nodes.
    LeavesOnly,
}

/// A random rooted tree on `n` nodes, node 0 the root. With probability
/// `stretch` a node hangs below its predecessor, otherwise below a uniform
/// earlier node, so `stretch` interpolates between random recursive trees
/// and long paths.
pub fn random_parents(rng: &mut SeededRng, n: usize, stretch: f64) -> Vec<Option<NodeId>> {
    (0..n)
        .map(|i| match i {
            0 => None,
            _ if rng.gen_bool(stretch) => Some(i - 1),
            _ => Some(rng.gen_range(0..i)),
        })
        .collect()
}

pub fn random_tree(rng: &mut SeededRng, n: usize, k: usize, mode: WeightMode) -> TreeSemilattice {
    let stretch = [0.0, 0.3, 0.6, 0.9][rng.gen_range(0..4)];
    let parent = random_parents(rng, n.max(1), stretch);
    let n = parent.len();
    let colors: Vec<ColorSet> = (0..n)
        .map(|_| ColorSet::from_colors((1..=k).filter(|_| rng.gen_bool(0.4))))
        .collect();
    let mut is_leaf = vec![true; n];
    for p in parent.iter().flatten() {
        is_leaf[*p] = false;
    }
    let mut raw: Vec<u64> = match mode {
        WeightMode::Uniform => vec![1; n],
        WeightMode::Random => (0..n).map(|_| rng.gen_range(0..=10)).collect(),
        WeightMode::LeavesOnly => {
            (0..n).map(|v| if is_leaf[v] { rng.gen_range(1..=10) } else { 0 }).collect()
        }
    };
    if raw.iter().all(|&w| w == 0) {
        raw[n - 1] = 1;
    }
    let total: u64 = raw.iter().sum();
    let weights = raw.iter().map(|&w| Rational::new((w as i64).into(), (total as i64).into())).collect();
    TreeSemilattice::new(parent, colors, weights, k).expect("generated tree is valid")
}

/// `count` trees with sizes in `1..=max_n`, colors from `0..=max_k`, and a
/// mix of weight modes. Deterministic in `seed`.
pub fn corpus(seed: u64, count: usize, max_n: usize, max_k: usize) -> Vec<TreeSemilattice> {
    (0..count)
        .map(|i| {
            let mut rng = seeded(seed, i as u64);
            let n = rng.gen_range(1..=max_n);
            let k = rng.gen_range(0..=max_k);
            let mode = [WeightMode::Uniform, WeightMode::Random, WeightMode::LeavesOnly][i % 3];
            random_tree(&mut rng, n, k, mode)
        })
        .collect()
}
