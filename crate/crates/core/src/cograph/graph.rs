use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rational::{ratio, Rational, ScaledMeasure, WeightSum};
use crate::tuples::tuple_count;

/// A simple graph with optional vertex weights (uniform when absent).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: Vec<Vec<bool>>,
    weights: Option<Vec<Rational>>,
}

impl SimpleGraph {
    pub fn empty(n: usize) -> Self {
        SimpleGraph { adj: vec![vec![false; n]; n], weights: None }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = SimpleGraph::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Input(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::Input(format!("loop at vertex {u}")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        SimpleGraph::from_edges(n, &edges).expect("path edges are valid")
    }

    pub fn complete(n: usize) -> Self {
        let mut g = SimpleGraph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub(crate) fn add_edge(&mut self, u: usize, v: usize) {
        self.adj[u][v] = true;
        self.adj[v][u] = true;
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u][v]
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n).flat_map(|u| (u + 1..n).filter(move |&v| self.adj[u][v]).map(move |v| (u, v))).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn set_weights(&mut self, weights: Vec<Rational>) -> Result<()> {
        if weights.len() != self.len() {
            return Err(Error::Input("weight count differs from vertex count".into()));
        }
        if weights.iter().any(|w| w < &Rational::zero()) {
            return Err(Error::Input("negative vertex weight".into()));
        }
        if weights.iter().sum::<Rational>() != Rational::one() {
            return Err(Error::Input("vertex weights do not sum to 1".into()));
        }
        self.weights = Some(weights);
        Ok(())
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    /// Weight of each vertex, uniform for unweighted graphs.
    pub fn weights(&self) -> Vec<Rational> {
        match &self.weights {
            Some(w) => w.clone(),
            None => vec![ratio(1, self.len().max(1) as i64); self.len()],
        }
    }

    /// The graph without vertex `v`; later vertices shift down by one.
    /// Weights are dropped.
    pub fn delete_vertex(&self, v: usize) -> SimpleGraph {
        let keep: Vec<usize> = (0..self.len()).filter(|&u| u != v).collect();
        let adj = keep.iter().map(|&a| keep.iter().map(|&b| self.adj[a][b]).collect()).collect();
        SimpleGraph { adj, weights: None }
    }
}

/// `t(F, G)`: the weighted probability that a random map `V(F) → V(G)` is a
/// homomorphism.
pub fn hom_density(f: &SimpleGraph, g: &SimpleGraph, budget: u128) -> Result<Rational> {
    if g.is_empty() {
        return Err(Error::Input("target graph has no vertices".into()));
    }
    let p = f.len();
    let needed = tuple_count(g.len(), p);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    if p == 0 {
        return Ok(Rational::one());
    }
    let measure = ScaledMeasure::new(&g.weights());
    // Earlier neighbours of each vertex of F, in index order.
    let back: Vec<Vec<usize>> = (0..p).map(|i| (0..i).filter(|&j| f.adjacent(i, j)).collect()).collect();
    let small = if measure.fits_small(p) { measure.small_nums() } else { None };
    let sum = (0..g.len())
        .into_par_iter()
        .map(|first| {
            let mut sum = WeightSum::default();
            let mut map = vec![first; p];
            extend(g, &back, &measure, small, &mut map, 1, &mut sum);
            sum
        })
        .reduce(WeightSum::default, |mut a, b| {
            a.merge(&b);
            a
        });
    Ok(sum.over(&measure.denom_pow(p)))
}

fn extend(
    g: &SimpleGraph,
    back: &[Vec<usize>],
    measure: &ScaledMeasure,
    small: Option<&[u64]>,
    map: &mut Vec<usize>,
    i: usize,
    sum: &mut WeightSum,
) {
    if i == map.len() {
        match small {
            Some(nums) => sum.add_small(map.iter().map(|&v| nums[v] as u128).product()),
            None => sum.add_big(&map.iter().map(|&v| measure.nums[v].clone()).product::<BigUint>()),
        }
        return;
    }
    for v in 0..g.len() {
        if back[i].iter().all(|&j| g.adjacent(map[j], v)) {
            map[i] = v;
            extend(g, back, measure, small, map, i + 1, sum);
        }
    }
}

/// Whether `F` is an induced subgraph of `G`, by backtracking over
/// injective maps.
pub fn induced_subgraph_check(f: &SimpleGraph, g: &SimpleGraph) -> bool {
    let p = f.len();
    if p == 0 {
        return true;
    }
    if p > g.len() {
        return false;
    }
    (0..g.len()).into_par_iter().any(|first| {
        let mut map = vec![first; p];
        let mut used = vec![false; g.len()];
        used[first] = true;
        embed(f, g, &mut map, &mut used, 1)
    })
}

fn embed(f: &SimpleGraph, g: &SimpleGraph, map: &mut Vec<usize>, used: &mut Vec<bool>, i: usize) -> bool {
    if i == map.len() {
        return true;
    }
    for v in 0..g.len() {
        if used[v] || (0..i).any(|j| f.adjacent(i, j) != g.adjacent(map[j], v)) {
            continue;
        }
        map[i] = v;
        used[v] = true;
        if embed(f, g, map, used, i + 1) {
            return true;
        }
        used[v] = false;
    }
    false
}
