//! m-partite cotrees, their graphs, and the interpretation of colored
//! tree-semilattices as weighted graphs.
//!
//! A semilattice is read as a graph through a [`ColorScheme`]: colors
//! `1..=m` mark vertex classes and each further color `m + i` stands for a
//! symmetric adjacency matrix. Two support nodes `x ≠ y` are adjacent when
//! some function color `f` of `x ∧ y` has `f(c(x), c(y)) = 1`.

mod formula;
mod graph;

use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rational::{ratio, Rational};
use crate::rng::SeededRng;
use crate::tree::{ColorSet, MeetStructure, NodeId, TreeSemilattice};

pub use formula::{
    enumerate_graph_formulas, graph_formula_classes, graph_pairing, parse_graph_formula,
    translate_formula, GraphFormula, GraphQf,
};
pub use graph::{hom_density, induced_subgraph_check, SimpleGraph};

/// A symmetric `m × m` 0/1 matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdjacencyFn {
    m: usize,
    bits: Vec<bool>,
}

impl AdjacencyFn {
    pub fn new(m: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != m * m {
            return Err(Error::Input(format!("adjacency function needs {} entries, got {}", m * m, bits.len())));
        }
        for i in 0..m {
            for j in 0..i {
                if bits[i * m + j] != bits[j * m + i] {
                    return Err(Error::Input(format!("adjacency function is not symmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        Ok(AdjacencyFn { m, bits })
    }

    pub fn constant(m: usize, value: bool) -> Self {
        AdjacencyFn { m, bits: vec![value; m * m] }
    }

    /// `f(i, j)` for 1-based colors.
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[(i - 1) * self.m + (j - 1)]
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Row-major bitstring, e.g. `0110`.
    pub fn bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn parse(m: usize, s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Input(format!("bad adjacency bit '{c}'"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        AdjacencyFn::new(m, bits)
    }
}

/// Colors `1..=m` are vertex classes; color `m + 1 + i` is `functions[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorScheme {
    pub m: usize,
    pub functions: Vec<AdjacencyFn>,
}

impl ColorScheme {
    pub fn k(&self) -> usize {
        self.m + self.functions.len()
    }

    pub fn function_color(&self, idx: usize) -> usize {
        self.m + 1 + idx
    }

    fn vertex_colors(&self, c: ColorSet) -> impl Iterator<Item = usize> + '_ {
        c.iter().filter(move |&i| i <= self.m)
    }

    fn function_colors(&self, c: ColorSet) -> impl Iterator<Item = &AdjacencyFn> + '_ {
        c.iter().filter(move |&i| i > self.m).filter_map(move |i| self.functions.get(i - self.m - 1))
    }

    /// The adjacency formula `Φ` evaluated at colors of `x`, `y`, `x ∧ y`.
    pub fn adjacent(&self, cx: ColorSet, cy: ColorSet, cm: ColorSet) -> bool {
        self.function_colors(cm).any(|f| {
            self.vertex_colors(cx).any(|i| self.vertex_colors(cy).any(|j| f.get(i, j)))
        })
    }
}

/// An m-partite cotree: leaves carry a color in `1..=m`, internal nodes an
/// adjacency function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cotree {
    m: usize,
    parent: Vec<Option<NodeId>>,
    labels: Vec<CotreeLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CotreeLabel {
    Leaf(usize),
    Internal(AdjacencyFn),
}

impl Cotree {
    pub fn new(m: usize, parent: Vec<Option<NodeId>>, labels: Vec<CotreeLabel>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Input("a cotree needs m >= 1".into()));
        }
        if parent.len() != labels.len() {
            return Err(Error::Input("parent and label counts differ".into()));
        }
        // Shape checks are delegated to the semilattice constructor.
        let n = parent.len();
        TreeSemilattice::uniform(parent.clone(), vec![ColorSet::EMPTY; n], 0)?;
        let mut has_child = vec![false; n];
        for p in parent.iter().flatten() {
            has_child[*p] = true;
        }
        for (v, label) in labels.iter().enumerate() {
            match label {
                CotreeLabel::Leaf(c) => {
                    if has_child[v] {
                        return Err(Error::Input(format!("node {v} is labeled as a leaf but has children")));
                    }
                    if *c == 0 || *c > m {
                        return Err(Error::Input(format!("leaf {v} has color {c} outside 1..={m}")));
                    }
                }
                CotreeLabel::Internal(f) => {
                    if !has_child[v] {
                        return Err(Error::Input(format!("internal node {v} has no children")));
                    }
                    if f.m() != m {
                        return Err(Error::Input(format!("node {v} has a {0}x{0} function, expected {m}x{m}", f.m())));
                    }
                }
            }
        }
        Ok(Cotree { m, parent, labels })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parents(&self) -> &[Option<NodeId>] {
        &self.parent
    }

    pub fn labels(&self) -> &[CotreeLabel] {
        &self.labels
    }

    /// Leaf node ids in increasing order; vertex `i` of the graph is
    /// `leaves()[i]`.
    pub fn leaves(&self) -> Vec<NodeId> {
        (0..self.len()).filter(|&v| matches!(self.labels[v], CotreeLabel::Leaf(_))).collect()
    }

    /// The cotree without `leaf`; internal nodes left without children are
    /// removed too.
    pub fn delete_leaf(&self, leaf: NodeId) -> Result<Cotree> {
        if !matches!(self.labels.get(leaf), Some(CotreeLabel::Leaf(_))) {
            return Err(Error::Input(format!("node {leaf} is not a leaf")));
        }
        if self.leaves().len() == 1 {
            return Err(Error::Input("cannot delete the only leaf".into()));
        }
        let n = self.len();
        let mut removed = vec![false; n];
        let mut children = vec![0usize; n];
        for p in self.parent.iter().flatten() {
            children[*p] += 1;
        }
        let mut v = leaf;
        loop {
            removed[v] = true;
            match self.parent[v] {
                Some(p) => {
                    children[p] -= 1;
                    if children[p] > 0 {
                        break;
                    }
                    v = p;
                }
                None => break,
            }
        }
        let mut index = vec![usize::MAX; n];
        let keep: Vec<NodeId> = (0..n).filter(|&v| !removed[v]).collect();
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let parent = keep.iter().map(|&v| self.parent[v].map(|p| index[p])).collect();
        let labels = keep.iter().map(|&v| self.labels[v].clone()).collect();
        Cotree::new(self.m, parent, labels)
    }
}

/// The graph on the leaves: `x ~ y` iff `f_{lca(x,y)}(c(x), c(y)) = 1`.
pub fn interpret_cotree(ct: &Cotree) -> SimpleGraph {
    let (t, scheme) = encode_cotree_as_semilattice(ct);
    let leaves = ct.leaves();
    let mut g = SimpleGraph::empty(leaves.len());
    for (a, &x) in leaves.iter().enumerate() {
        for (b, &y) in leaves.iter().enumerate().skip(a + 1) {
            if scheme.adjacent(t.color(x), t.color(y), t.color(t.meet(x, y))) {
                g.add_edge(a, b);
            }
        }
    }
    g
}

/// The cotree as a semilattice with uniform measure on the leaves.
/// Identical adjacency functions share one color.
pub fn encode_cotree_as_semilattice(ct: &Cotree) -> (TreeSemilattice, ColorScheme) {
    let mut functions: Vec<AdjacencyFn> = Vec::new();
    let leaves = ct.leaves().len();
    let mut colors = Vec::with_capacity(ct.len());
    let mut weights = Vec::with_capacity(ct.len());
    for label in &ct.labels {
        match label {
            CotreeLabel::Leaf(c) => {
                colors.push(ColorSet::from_colors([*c]));
                weights.push(ratio(1, leaves as i64));
            }
            CotreeLabel::Internal(f) => {
                let idx = functions.iter().position(|g| g == f).unwrap_or_else(|| {
                    functions.push(f.clone());
                    functions.len() - 1
                });
                colors.push(ColorSet::from_colors([ct.m + 1 + idx]));
                weights.push(Rational::zero());
            }
        }
    }
    let scheme = ColorScheme { m: ct.m, functions };
    let t = TreeSemilattice::new(ct.parent.clone(), colors, weights, scheme.k())
        .expect("cotree encodings are valid semilattices");
    (t, scheme)
}

/// `𝖨(T, μ)`: the weighted graph on the support of `μ`. Returns the graph
/// and the node behind each vertex.
pub fn interpret_semilattice(t: &TreeSemilattice, scheme: &ColorScheme) -> Result<(SimpleGraph, Vec<NodeId>)> {
    if t.k() > scheme.k() {
        return Err(Error::Input(format!(
            "structure has {} colors but the scheme only defines {}",
            t.k(),
            scheme.k()
        )));
    }
    let support = t.support();
    for &v in &support {
        if scheme.vertex_colors(t.color(v)).next().is_none() {
            return Err(Error::Domain(format!("support node {v} has no vertex color")));
        }
    }
    let mut g = SimpleGraph::empty(support.len());
    for (a, &x) in support.iter().enumerate() {
        for (b, &y) in support.iter().enumerate().skip(a + 1) {
            let m = t.meet(x, y);
            if m != x && m != y && scheme.function_colors(t.color(m)).next().is_none() {
                return Err(Error::Domain(format!("meet node {m} of {x} and {y} has no function color")));
            }
            if scheme.adjacent(t.color(x), t.color(y), t.color(m)) {
                g.add_edge(a, b);
            }
        }
    }
    g.set_weights(support.iter().map(|&v| t.weight(v).clone()).collect())?;
    Ok((g, support))
}

/// A random cotree with `leaves` leaves, internal fan-out 2 to 4 and random
/// symmetric functions.
pub fn random_cotree(rng: &mut SeededRng, leaves: usize, m: usize) -> Cotree {
    fn build(
        rng: &mut SeededRng,
        leaves: usize,
        m: usize,
        parent: Option<NodeId>,
        out: &mut (Vec<Option<NodeId>>, Vec<CotreeLabel>),
    ) {
        let id = out.0.len();
        out.0.push(parent);
        if leaves == 1 {
            out.1.push(CotreeLabel::Leaf(rng.gen_range(1..=m)));
            return;
        }
        let mut bits = vec![false; m * m];
        for i in 0..m {
            for j in 0..=i {
                let b = rng.gen_bool(0.5);
                bits[i * m + j] = b;
                bits[j * m + i] = b;
            }
        }
        out.1.push(CotreeLabel::Internal(AdjacencyFn { m, bits }));
        let parts = rng.gen_range(2..=leaves.min(4));
        // Random composition of `leaves` into `parts` positive sizes.
        let mut cuts: Vec<usize> = Vec::new();
        while cuts.len() < parts - 1 {
            let c = rng.gen_range(1..leaves);
            if !cuts.contains(&c) {
                cuts.push(c);
            }
        }
        cuts.sort_unstable();
        let mut prev = 0;
        for c in cuts.into_iter().chain(std::iter::once(leaves)) {
            build(rng, c - prev, m, Some(id), out);
            prev = c;
        }
    }
    let mut out = (Vec::new(), Vec::new());
    build(rng, leaves.max(1), m.max(1), None, &mut out);
    Cotree::new(m.max(1), out.0, out.1).expect("generated cotree is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn k2() -> Cotree {
        Cotree::new(
            1,
            vec![None, Some(0), Some(0)],
            vec![CotreeLabel::Internal(AdjacencyFn::constant(1, true)), CotreeLabel::Leaf(1), CotreeLabel::Leaf(1)],
        )
        .unwrap()
    }

    fn p3() -> Cotree {
        Cotree::new(
            1,
            vec![None, Some(0), Some(0), Some(2), Some(2)],
            vec![
                CotreeLabel::Internal(AdjacencyFn::constant(1, true)),
                CotreeLabel::Leaf(1),
                CotreeLabel::Internal(AdjacencyFn::constant(1, false)),
                CotreeLabel::Leaf(1),
                CotreeLabel::Leaf(1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn small_interpretations() {
        let g = interpret_cotree(&k2());
        assert_eq!(g.edge_count(), 1);
        let g = interpret_cotree(&p3());
        // Leaves 1, 3, 4 become vertices 0, 1, 2.
        assert_eq!(g.edges(), vec![(0, 1), (0, 2)]);
        let empty = Cotree::new(
            1,
            vec![None, Some(0), Some(0), Some(0)],
            vec![CotreeLabel::Internal(AdjacencyFn::constant(1, false)), CotreeLabel::Leaf(1), CotreeLabel::Leaf(1), CotreeLabel::Leaf(1)],
        )
        .unwrap();
        assert_eq!(interpret_cotree(&empty).edge_count(), 0);
    }

    #[test]
    fn encoding_shapes() {
        let (t, s) = encode_cotree_as_semilattice(&k2());
        assert_eq!(t.len(), 3);
        assert_eq!(t.weight(1), &ratio(1, 2));
        assert_eq!(s.functions.len(), 1);
        let (t, s) = encode_cotree_as_semilattice(&p3());
        assert_eq!(t.len(), 5);
        assert_eq!(t.weight(3), &ratio(1, 3));
        assert_eq!(s.functions.len(), 2);
    }

    #[test]
    fn round_trip() {
        let mut rng = seeded(4, 0);
        for i in 0..40 {
            let ct = random_cotree(&mut rng, 1 + i % 13, 1 + i % 3);
            let (t, s) = encode_cotree_as_semilattice(&ct);
            let (g, support) = interpret_semilattice(&t, &s).unwrap();
            assert_eq!(support, ct.leaves());
            assert_eq!(g.edges(), interpret_cotree(&ct).edges());
        }
    }

    #[test]
    fn single_vertex() {
        let ct = Cotree::new(2, vec![None], vec![CotreeLabel::Leaf(2)]).unwrap();
        let g = interpret_cotree(&ct);
        assert_eq!(g.len(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn deleting_a_leaf_is_hereditary() {
        let mut rng = seeded(9, 0);
        for i in 0..30 {
            let ct = random_cotree(&mut rng, 2 + i % 9, 1 + i % 2);
            let g = interpret_cotree(&ct);
            for (vertex, &leaf) in ct.leaves().iter().enumerate() {
                let smaller = interpret_cotree(&ct.delete_leaf(leaf).unwrap());
                assert_eq!(smaller.edges(), g.delete_vertex(vertex).edges());
            }
        }
    }

    #[test]
    fn rejects_bad_cotrees() {
        let asym = AdjacencyFn::new(2, vec![false, true, false, false]);
        assert!(asym.is_err());
        let bad = Cotree::new(1, vec![None, Some(0)], vec![CotreeLabel::Leaf(1), CotreeLabel::Leaf(1)]);
        assert!(bad.is_err());
        let color = Cotree::new(1, vec![None], vec![CotreeLabel::Leaf(2)]);
        assert!(color.is_err());
    }

    #[test]
    fn missing_vertex_color_is_a_domain_error() {
        let t = TreeSemilattice::chain(2);
        let s = ColorScheme { m: 1, functions: vec![] };
        assert!(matches!(interpret_semilattice(&t, &s), Err(Error::Domain(_))));
    }
}
