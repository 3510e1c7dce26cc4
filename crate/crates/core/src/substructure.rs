//! Generated sub-semilattices and canonical encodings of marked colored
//! trees.
//!
//! The encoding is an AHU-style string: every node renders as
//! `(<color bits>:<mark positions><children...>)` with the children sorted by
//! their own encodings, so two marked colored rooted trees get the same
//! string exactly when they are isomorphic. Weights are not part of it.

use std::fmt::Write as _;

use crate::error::{input, Error, Result};
use crate::tree::{ColorSet, MeetStructure, NodeId, TreeSemilattice};

/// `T<u_1, ..., u_p>`: the generators plus all their pairwise meets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedSubstructure {
    /// Host node ids, in host preorder (so parents precede children).
    pub carrier: Vec<NodeId>,
    /// Generators in order, as host node ids; repetitions allowed.
    pub marks: Vec<NodeId>,
    pub colors: Vec<ColorSet>,
    /// Parent of each carrier element as an index into `carrier`.
    pub parent: Vec<Option<usize>>,
    /// Meet table on carrier indices, row-major.
    pub meet_table: Vec<usize>,
}

impl MarkedSubstructure {
    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    fn index_of(&self, host: NodeId) -> usize {
        self.carrier.iter().position(|&c| c == host).expect("mark lies in carrier")
    }

    /// Mark positions expressed as carrier indices.
    pub fn mark_indices(&self) -> Vec<usize> {
        self.marks.iter().map(|&m| self.index_of(m)).collect()
    }

    pub fn encoding(&self) -> String {
        encode_tree(&self.parent, &self.colors, &self.mark_indices())
    }
}

impl MeetStructure for MarkedSubstructure {
    fn node_count(&self) -> usize {
        self.carrier.len()
    }

    fn meet(&self, u: NodeId, v: NodeId) -> NodeId {
        self.meet_table[u * self.carrier.len() + v]
    }

    fn colors(&self, u: NodeId) -> ColorSet {
        self.colors[u]
    }
}

/// Carrier of `T<gens>` in host preorder, plus the compressed parent
/// relation on it.
fn carrier_and_parents(t: &TreeSemilattice, gens: &[NodeId]) -> (Vec<NodeId>, Vec<Option<usize>>) {
    let mut carrier: Vec<NodeId> = gens.to_vec();
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            carrier.push(t.meet(gens[i], gens[j]));
        }
    }
    carrier.sort_by_key(|&v| (t.depth(v), v));
    carrier.dedup();
    // Sorting by depth puts every ancestor before its descendants; the parent
    // of an element is its deepest proper ancestor in the carrier.
    let parent = (0..carrier.len())
        .map(|i| (0..i).rev().find(|&j| carrier[j] != carrier[i] && t.leq(carrier[j], carrier[i])))
        .collect();
    (carrier, parent)
}

/// The marked sub-semilattice generated by `gens`.
pub fn generated_subsemilattice(t: &TreeSemilattice, gens: &[NodeId]) -> Result<MarkedSubstructure> {
    if gens.is_empty() {
        return input("generator list must be nonempty");
    }
    for &g in gens {
        t.check_node(g)?;
    }
    let (carrier, parent) = carrier_and_parents(t, gens);
    let m = carrier.len();
    let mut meet_table = vec![0; m * m];
    for a in 0..m {
        for b in 0..m {
            let host = t.meet(carrier[a], carrier[b]);
            let idx = carrier.iter().position(|&c| c == host).ok_or_else(|| {
                Error::Invariant(format!(
                    "carrier not closed: {}∧{} = {host} missing",
                    carrier[a], carrier[b]
                ))
            })?;
            meet_table[a * m + b] = idx;
        }
    }
    let colors = carrier.iter().map(|&v| t.color(v)).collect();
    Ok(MarkedSubstructure { carrier, marks: gens.to_vec(), colors, parent, meet_table })
}

/// Canonical encoding of the marked generated substructure `T<tuple>`:
/// the isomorphism type of `tuple`. Skips building the meet table.
pub fn type_encoding(t: &TreeSemilattice, tuple: &[NodeId]) -> String {
    let (carrier, parent) = carrier_and_parents(t, tuple);
    let colors: Vec<ColorSet> = carrier.iter().map(|&v| t.color(v)).collect();
    let marks: Vec<usize> =
        tuple.iter().map(|m| carrier.iter().position(|c| c == m).expect("mark in carrier")).collect();
    encode_tree(&parent, &colors, &marks)
}

/// Canonical encoding of the whole structure (colors and tree shape, not
/// weights), optionally with an ordered list of marked nodes.
pub fn canonical_encoding(t: &TreeSemilattice, marks: Option<&[NodeId]>) -> String {
    let marks = marks.unwrap_or(&[]);
    encode_tree(t.parents(), t.color_sets(), marks)
}

/// Encodes a rooted tree given by parent indices. `marks[i]` is the node
/// carrying mark position `i + 1`.
pub fn encode_tree(parent: &[Option<usize>], colors: &[ColorSet], marks: &[usize]) -> String {
    let n = parent.len();
    let mut children = vec![Vec::new(); n];
    let mut root = None;
    for (v, p) in parent.iter().enumerate() {
        match p {
            Some(p) => children[*p].push(v),
            None => root = Some(v),
        }
    }
    let mut mark_lists = vec![Vec::new(); n];
    for (pos, &m) in marks.iter().enumerate() {
        mark_lists[m].push(pos + 1);
    }
    // Post-order so that children are encoded before their parent.
    let root = root.expect("tree has a root");
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        order.push(v);
        stack.extend(children[v].iter().copied());
    }
    let mut enc: Vec<String> = vec![String::new(); n];
    for &v in order.iter().rev() {
        let mut kids: Vec<String> = children[v].iter().map(|&c| std::mem::take(&mut enc[c])).collect();
        kids.sort_unstable();
        let mut s = String::with_capacity(8 + kids.iter().map(String::len).sum::<usize>());
        write!(s, "({}:", colors[v].bits()).unwrap();
        for (i, m) in mark_lists[v].iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            write!(s, "{m}").unwrap();
        }
        for k in kids {
            s.push_str(&k);
        }
        s.push(')');
        enc[v] = s;
    }
    std::mem::take(&mut enc[root])
}

/// A marked colored rooted tree decoded from a canonical encoding. Used to
/// evaluate formulas on an isomorphism type without its host structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedTree {
    pub parent: Vec<Option<usize>>,
    pub colors: Vec<ColorSet>,
    /// `marks[i]` is the node carrying mark position `i + 1`.
    pub marks: Vec<usize>,
    depth: Vec<usize>,
}

impl MarkedTree {
    pub fn decode(enc: &str) -> Result<Self> {
        let bytes = enc.as_bytes();
        let err = |pos: usize, msg: &str| Error::Syntax { pos, msg: msg.to_string() };
        let mut parent = Vec::new();
        let mut colors = Vec::new();
        let mut depth = Vec::new();
        let mut marked: Vec<(usize, usize)> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        let mut i = 0;
        let number = |i: &mut usize| -> Option<usize> {
            let start = *i;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
            enc[start..*i].parse().ok()
        };
        while i < bytes.len() {
            match bytes[i] {
                b'(' => {
                    if stack.is_empty() && !parent.is_empty() {
                        return Err(err(i, "more than one root"));
                    }
                    i += 1;
                    let bits = number(&mut i).ok_or_else(|| err(i, "expected color bits"))?;
                    if bytes.get(i) != Some(&b':') {
                        return Err(err(i, "expected ':'"));
                    }
                    i += 1;
                    let v = parent.len();
                    parent.push(stack.last().copied());
                    colors.push(ColorSet(bits as u32));
                    depth.push(stack.len());
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        let m = number(&mut i).unwrap();
                        marked.push((m, v));
                        if bytes.get(i) == Some(&b',') {
                            i += 1;
                        }
                    }
                    stack.push(v);
                }
                b')' => {
                    stack.pop().ok_or_else(|| err(i, "unbalanced ')'"))?;
                    i += 1;
                }
                _ => return Err(err(i, "unexpected character")),
            }
        }
        if !stack.is_empty() || parent.is_empty() {
            return Err(err(bytes.len(), "unterminated encoding"));
        }
        marked.sort_unstable();
        let marks: Vec<usize> = marked.iter().map(|&(_, v)| v).collect();
        if marked.iter().enumerate().any(|(i, &(m, _))| m != i + 1) {
            return Err(err(0, "mark positions must be exactly 1..p"));
        }
        Ok(MarkedTree { parent, colors, marks, depth })
    }

    pub fn arity(&self) -> usize {
        self.marks.len()
    }
}

impl MeetStructure for MarkedTree {
    fn node_count(&self) -> usize {
        self.parent.len()
    }

    fn meet(&self, mut u: NodeId, mut v: NodeId) -> NodeId {
        while self.depth[u] > self.depth[v] {
            u = self.parent[u].unwrap();
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v].unwrap();
        }
        while u != v {
            u = self.parent[u].unwrap();
            v = self.parent[v].unwrap();
        }
        u
    }

    fn colors(&self, u: NodeId) -> ColorSet {
        self.colors[u]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::ColorSet;

    #[test]
    fn carriers() {
        let chain = TreeSemilattice::chain(2);
        assert_eq!(generated_subsemilattice(&chain, &[0, 1]).unwrap().carrier, vec![0, 1]);
        let star = TreeSemilattice::star(3);
        let s = generated_subsemilattice(&star, &[1, 2, 3]).unwrap();
        let mut c = s.carrier.clone();
        c.sort();
        assert_eq!(c, vec![0, 1, 2, 3]);
        assert_eq!(generated_subsemilattice(&star, &[2]).unwrap().carrier, vec![2]);
        assert!(generated_subsemilattice(&star, &[]).is_err());
    }

    #[test]
    fn substructure_meet_matches_host() {
        let star = TreeSemilattice::star(3);
        let s = generated_subsemilattice(&star, &[1, 2, 2]).unwrap();
        let idx = s.mark_indices();
        assert_eq!(s.carrier[s.meet(idx[0], idx[1])], 0);
        assert_eq!(s.carrier[s.meet(idx[1], idx[2])], 2);
    }

    #[test]
    fn encodings_distinguish_shapes_and_mark_order() {
        let chain = TreeSemilattice::chain(3);
        let star = TreeSemilattice::star(2);
        assert_ne!(canonical_encoding(&chain, None), canonical_encoding(&star, None));

        let t = TreeSemilattice::uniform(
            vec![None, Some(0), Some(0)],
            vec![ColorSet::EMPTY, ColorSet(1), ColorSet(2)],
            2,
        )
        .unwrap();
        assert_ne!(
            canonical_encoding(&t, Some(&[1, 2])),
            canonical_encoding(&t, Some(&[2, 1]))
        );
        // Uncolored leaves are interchangeable.
        assert_eq!(
            canonical_encoding(&star, Some(&[1, 2])),
            canonical_encoding(&star, Some(&[2, 1]))
        );
    }

    #[test]
    fn decode_round_trip() {
        let t = TreeSemilattice::uniform(
            vec![None, Some(0), Some(0), Some(1)],
            vec![ColorSet(1), ColorSet(0), ColorSet(3), ColorSet(2)],
            2,
        )
        .unwrap();
        let enc = type_encoding(&t, &[3, 2, 3]);
        let decoded = MarkedTree::decode(&enc).unwrap();
        assert_eq!(decoded.arity(), 3);
        assert_eq!(encode_tree(&decoded.parent, &decoded.colors, &decoded.marks), enc);
        assert_eq!(decoded.marks[0], decoded.marks[2]);
        assert!(MarkedTree::decode("(1:").is_err());
        assert!(MarkedTree::decode("(1:2)").is_err());
    }
}
