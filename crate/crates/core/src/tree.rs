//! Finite weighted colored tree-semilattices.
//!
//! A tree-semilattice is stored as a rooted tree given by parent pointers.
//! The order is the ancestor order (the root is the minimum) and the meet of
//! two nodes is their lowest common ancestor, answered in O(1) from an Euler
//! tour with a sparse table.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{input, Error, Result};
use crate::rational::Rational;

pub type NodeId = usize;

/// Set of unary relations `M_i` (`1 <= i <= 32`) a node belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ColorSet(pub u32);

impl ColorSet {
    pub const EMPTY: ColorSet = ColorSet(0);

    pub fn from_colors(colors: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = 0u32;
        for c in colors {
            assert!((1..=32).contains(&c), "color index {c} out of range 1..=32");
            bits |= 1 << (c - 1);
        }
        ColorSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, color: usize) -> bool {
        (1..=32).contains(&color) && self.0 & (1 << (color - 1)) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Largest color index present, 0 for the empty set.
    pub fn max_color(self) -> usize {
        32 - self.0.leading_zeros() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (1..=32).filter(move |&c| self.contains(c))
    }
}

/// Total order on colors: lexicographic on the increasing color sequences.
/// Agrees with `min(c1 \ c2) < min(c2 \ c1)` (with `min ∅ = 0`) whenever
/// that rule is consistent; the bare rule has cycles such as
/// `{1,2} < {1,3} < {2} < {1,2}`.
pub fn color_compare(c1: ColorSet, c2: ColorSet) -> Ordering {
    let diff = c1.0 ^ c2.0;
    if diff == 0 {
        return Ordering::Equal;
    }
    // The lowest differing color decides, unless the other sequence has
    // already ended there.
    let low = diff & diff.wrapping_neg();
    let (has, other) = if c1.0 & low != 0 { (Ordering::Less, c2.0) } else { (Ordering::Greater, c1.0) };
    if other & !(low - 1) == 0 {
        has.reverse()
    } else {
        has
    }
}

impl Ord for ColorSet {
    fn cmp(&self, other: &Self) -> Ordering {
        color_compare(*self, *other)
    }
}

impl PartialOrd for ColorSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ColorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Anything quantifier-free formulas can be evaluated on: a meet operation
/// plus colors.
pub trait MeetStructure {
    fn node_count(&self) -> usize;
    fn meet(&self, u: NodeId, v: NodeId) -> NodeId;
    fn colors(&self, u: NodeId) -> ColorSet;
}

#[derive(Debug, Clone)]
struct EulerLca {
    first: Vec<usize>,
    // sparse[j][i]: node of minimum depth in euler[i .. i + 2^j]
    sparse: Vec<Vec<NodeId>>,
}

impl EulerLca {
    fn build(root: NodeId, children: &[Vec<NodeId>], depth: &[usize]) -> Self {
        let n = children.len();
        let mut euler = Vec::with_capacity(2 * n);
        let mut first = vec![usize::MAX; n];
        let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
        while let Some((v, i)) = stack.pop() {
            if first[v] == usize::MAX {
                first[v] = euler.len();
            }
            euler.push(v);
            if i < children[v].len() {
                stack.push((v, i + 1));
                stack.push((children[v][i], 0));
            }
        }
        let m = euler.len();
        let mut sparse = vec![euler];
        let mut width = 1;
        while 2 * width <= m {
            let prev = sparse.last().unwrap();
            let row: Vec<NodeId> = (0..=m - 2 * width)
                .map(|i| {
                    let (a, b) = (prev[i], prev[i + width]);
                    if depth[a] <= depth[b] {
                        a
                    } else {
                        b
                    }
                })
                .collect();
            sparse.push(row);
            width *= 2;
        }
        EulerLca { first, sparse }
    }

    fn query(&self, u: NodeId, v: NodeId, depth: &[usize]) -> NodeId {
        let (mut l, mut r) = (self.first[u], self.first[v]);
        if l > r {
            std::mem::swap(&mut l, &mut r);
        }
        let len = r - l + 1;
        let j = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let a = self.sparse[j][l];
        let b = self.sparse[j][r + 1 - (1 << j)];
        if depth[a] <= depth[b] {
            a
        } else {
            b
        }
    }
}

/// A finite colored tree-semilattice with a probability measure given by
/// exact rational node weights.
#[derive(Debug, Clone)]
pub struct TreeSemilattice {
    parent: Vec<Option<NodeId>>,
    colors: Vec<ColorSet>,
    weights: Vec<Rational>,
    k: usize,
    root: NodeId,
    children: Vec<Vec<NodeId>>,
    depth: Vec<usize>,
    tin: Vec<usize>,
    tout: Vec<usize>,
    preorder: Vec<NodeId>,
    lca: EulerLca,
}

impl TreeSemilattice {
    /// Builds and validates a structure. `k` is the number of unary
    /// relations; every color must lie in `1..=k`.
    pub fn new(
        parent: Vec<Option<NodeId>>,
        colors: Vec<ColorSet>,
        weights: Vec<Rational>,
        k: usize,
    ) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return input("a tree-semilattice needs at least one node");
        }
        if colors.len() != n || weights.len() != n {
            return input(format!(
                "length mismatch: {n} parents, {} colors, {} weights",
                colors.len(),
                weights.len()
            ));
        }
        if k > 32 {
            return input(format!("at most 32 colors are supported, got k = {k}"));
        }
        let roots: Vec<NodeId> = (0..n).filter(|&v| parent[v].is_none()).collect();
        if roots.len() != 1 {
            return input(format!("expected exactly one root, found {}", roots.len()));
        }
        let root = roots[0];
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return input(format!("node {v} has out-of-range parent {p}"));
                }
                if p == v {
                    return input(format!("node {v} is its own parent"));
                }
                children[p].push(v);
            }
        }
        for (v, c) in colors.iter().enumerate() {
            if c.max_color() > k {
                return input(format!("node {v} uses color {} > k = {k}", c.max_color()));
            }
        }
        let mut total = Rational::zero();
        for (v, w) in weights.iter().enumerate() {
            if w.is_negative() {
                return input(format!("node {v} has negative weight {w}"));
            }
            total += w;
        }
        if !total.is_one() {
            return input(format!("weights sum to {total}, expected exactly 1"));
        }

        // Preorder traversal doubles as the connectivity/acyclicity check.
        let mut depth = vec![0; n];
        let mut tin = vec![usize::MAX; n];
        let mut tout = vec![0; n];
        let mut preorder = Vec::with_capacity(n);
        let mut stack: Vec<(NodeId, bool)> = vec![(root, false)];
        while let Some((v, done)) = stack.pop() {
            if done {
                tout[v] = preorder.len();
                continue;
            }
            tin[v] = preorder.len();
            preorder.push(v);
            stack.push((v, true));
            for &c in children[v].iter().rev() {
                depth[c] = depth[v] + 1;
                stack.push((c, false));
            }
        }
        if preorder.len() != n {
            return input("parent relation is not a single rooted tree (cycle or detached nodes)");
        }
        let lca = EulerLca::build(root, &children, &depth);
        Ok(TreeSemilattice {
            parent,
            colors,
            weights,
            k,
            root,
            children,
            depth,
            tin,
            tout,
            preorder,
            lca,
        })
    }

    /// Same tree with the uniform measure on all nodes.
    pub fn uniform(parent: Vec<Option<NodeId>>, colors: Vec<ColorSet>, k: usize) -> Result<Self> {
        let n = parent.len() as i64;
        let w = crate::rational::ratio(1, n.max(1));
        TreeSemilattice::new(parent, colors, vec![w; n as usize], k)
    }

    /// Uniform, uncolored chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        let parent = (0..n).map(|i| i.checked_sub(1)).collect();
        TreeSemilattice::uniform(parent, vec![ColorSet::EMPTY; n], 0).expect("chain is valid")
    }

    /// Uniform, uncolored star: root 0 with leaves `1..=leaves`.
    pub fn star(leaves: usize) -> Self {
        let parent = (0..=leaves).map(|i| if i == 0 { None } else { Some(0) }).collect();
        TreeSemilattice::uniform(parent, vec![ColorSet::EMPTY; leaves + 1], 0)
            .expect("star is valid")
    }

    /// Replaces the measure, keeping tree and colors.
    pub fn with_weights(&self, weights: Vec<Rational>) -> Result<Self> {
        TreeSemilattice::new(self.parent.clone(), self.colors.clone(), weights, self.k)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<NodeId>] {
        &self.parent
    }

    pub fn color(&self, v: NodeId) -> ColorSet {
        self.colors[v]
    }

    pub fn color_sets(&self) -> &[ColorSet] {
        &self.colors
    }

    pub fn weight(&self, v: NodeId) -> &Rational {
        &self.weights[v]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    /// Nodes in preorder (parents before children).
    pub fn preorder(&self) -> &[NodeId] {
        &self.preorder
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            input(format!("node {v} out of range (structure has {} nodes)", self.len()))
        }
    }

    /// Lowest common ancestor, with node-id validation.
    pub fn try_meet(&self, u: NodeId, v: NodeId) -> Result<NodeId> {
        self.check_node(u)?;
        self.check_node(v)?;
        Ok(self.meet(u, v))
    }

    /// The unique predecessor of a non-root node.
    pub fn father(&self, v: NodeId) -> Result<NodeId> {
        self.check_node(v)?;
        self.parent[v]
            .ok_or_else(|| Error::Domain(format!("node {v} is the root and has no father")))
    }

    /// `u <= v` in the semilattice order, i.e. `u` is an ancestor of `v` or
    /// equal to it.
    pub fn leq(&self, u: NodeId, v: NodeId) -> bool {
        self.tin[u] <= self.tin[v] && self.tin[v] < self.tout[u]
    }

    /// `T_v = {u : u >= v}`, in preorder.
    pub fn subtree_nodes(&self, v: NodeId) -> Vec<NodeId> {
        self.preorder[self.tin[v]..self.tout[v]].to_vec()
    }

    pub fn subtree_size(&self, v: NodeId) -> usize {
        self.tout[v] - self.tin[v]
    }

    /// `F_v`: the minimal elements of `T_v \ {v}`, i.e. the children of `v`.
    pub fn minimal_above(&self, v: NodeId) -> Vec<NodeId> {
        self.children[v].clone()
    }

    /// `μ(T_v)` for every node.
    pub fn subtree_measures(&self) -> Vec<Rational> {
        let mut m = self.weights.clone();
        for &v in self.preorder.iter().rev() {
            if let Some(p) = self.parent[v] {
                let mv = m[v].clone();
                m[p] += mv;
            }
        }
        m
    }

    /// Nodes of positive weight.
    pub fn support(&self) -> Vec<NodeId> {
        (0..self.len()).filter(|&v| self.weights[v].is_positive()).collect()
    }

    /// Distinct colors used by the nodes.
    pub fn distinct_colors(&self) -> Vec<ColorSet> {
        let mut cs = self.colors.clone();
        cs.sort();
        cs.dedup();
        cs
    }

    /// Relabels nodes: old node `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[NodeId]) -> Result<Self> {
        let n = self.len();
        if perm.len() != n {
            return input("permutation length mismatch");
        }
        let mut parent = vec![None; n];
        let mut colors = vec![ColorSet::EMPTY; n];
        let mut weights = vec![Rational::zero(); n];
        let mut seen = vec![false; n];
        for v in 0..n {
            let t = perm[v];
            if t >= n || seen[t] {
                return input("not a permutation");
            }
            seen[t] = true;
            parent[t] = self.parent[v].map(|p| perm[p]);
            colors[t] = self.colors[v];
            weights[t] = self.weights[v].clone();
        }
        TreeSemilattice::new(parent, colors, weights, self.k)
    }
}

impl MeetStructure for TreeSemilattice {
    fn node_count(&self) -> usize {
        self.len()
    }

    fn meet(&self, u: NodeId, v: NodeId) -> NodeId {
        if u == v {
            return u;
        }
        self.lca.query(u, v, &self.depth)
    }

    fn colors(&self, u: NodeId) -> ColorSet {
        self.colors[u]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn meet_basics() {
        let star = TreeSemilattice::star(3);
        assert_eq!(star.meet(1, 2), 0);
        assert_eq!(star.meet(2, 2), 2);
        assert_eq!(star.meet(0, 3), 0);
        let chain = TreeSemilattice::chain(5);
        assert_eq!(chain.meet(4, 2), 2);
        assert!(star.try_meet(0, 9).is_err());
    }

    #[test]
    fn father_subtree_minimal_above() {
        let chain = TreeSemilattice::chain(3);
        assert_eq!(chain.father(2).unwrap(), 1);
        assert!(matches!(chain.father(0), Err(Error::Domain(_))));
        assert_eq!(chain.subtree_nodes(0), vec![0, 1, 2]);
        let star = TreeSemilattice::star(3);
        assert_eq!(star.minimal_above(0), vec![1, 2, 3]);
        assert_eq!(star.subtree_nodes(2), vec![2]);
    }

    #[test]
    fn color_order() {
        let c = |v: &[usize]| ColorSet::from_colors(v.iter().copied());
        assert_eq!(color_compare(c(&[1]), c(&[2])), Ordering::Less);
        assert_eq!(color_compare(c(&[1]), c(&[1, 2])), Ordering::Less);
        assert_eq!(color_compare(c(&[1, 2]), c(&[1, 2])), Ordering::Equal);
        assert_eq!(color_compare(c(&[]), c(&[3])), Ordering::Less);
        assert_eq!(color_compare(c(&[2, 3]), c(&[1])), Ordering::Greater);
        assert_eq!(color_compare(c(&[1, 3]), c(&[2])), Ordering::Less);
        let all: Vec<ColorSet> = (0..32u32).map(ColorSet).collect();
        for &a in &all {
            for &b in &all {
                for &x in &all {
                    if a < b && b < x {
                        assert!(a < x);
                    }
                }
                assert_eq!(a.cmp(&b), a.iter().cmp(b.iter()));
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let one = || vec![ratio(1, 2), ratio(1, 2)];
        // two roots
        assert!(TreeSemilattice::new(vec![None, None], vec![ColorSet::EMPTY; 2], one(), 0).is_err());
        // cycle
        assert!(TreeSemilattice::new(
            vec![None, Some(2), Some(1)],
            vec![ColorSet::EMPTY; 3],
            vec![ratio(1, 3); 3],
            0
        )
        .is_err());
        // weights
        assert!(TreeSemilattice::new(
            vec![None, Some(0)],
            vec![ColorSet::EMPTY; 2],
            vec![ratio(1, 2), ratio(1, 3)],
            0
        )
        .is_err());
        // color above k
        assert!(TreeSemilattice::new(vec![None, Some(0)], vec![ColorSet(2), ColorSet(0)], one(), 1)
            .is_err());
    }

    #[test]
    fn subtree_measures_sum() {
        let t = TreeSemilattice::chain(4);
        let m = t.subtree_measures();
        assert_eq!(m[0], ratio(1, 1));
        assert_eq!(m[2], ratio(1, 2));
    }
}
