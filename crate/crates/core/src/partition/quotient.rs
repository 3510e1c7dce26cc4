//! The quotient tree `T/P` and weak homomorphisms.

use crate::error::{Error, Result};
use crate::partition::{EpsPartition, PartType};
use crate::rational::Rational;
use crate::tree::{ColorSet, MeetStructure, NodeId, TreeSemilattice};

/// `T/P` as an uncolored weighted tree-semilattice on part indices, with
/// the partition map.
#[derive(Debug, Clone)]
pub struct QuotientTree {
    pub tree: TreeSemilattice,
    pub part_of: Vec<usize>,
}

/// Father of a non-root part: the part holding the father of its
/// attachment vertex when the attachment vertex lies in the part, and the
/// part holding the attachment vertex otherwise (type 3).
pub fn quotient_tree(t: &TreeSemilattice, p: &EpsPartition) -> Result<QuotientTree> {
    let q = p.parts.len();
    let mut parent = vec![None; q];
    let mut weights = vec![Rational::default(); q];
    let root_part = p.part_of[t.root()];
    for (i, part) in p.parts.iter().enumerate() {
        weights[i] = part.members.iter().map(|&v| t.weight(v)).sum();
        if i == root_part {
            continue;
        }
        let a = part.attach;
        let father = if p.part_of[a] == i {
            p.part_of[t.father(a)?]
        } else {
            debug_assert_eq!(part.kind, PartType::Forest);
            p.part_of[a]
        };
        if father == i {
            return Err(Error::Invariant(format!("part {i} would be its own father")));
        }
        parent[i] = Some(father);
    }
    let tree = TreeSemilattice::new(parent, vec![ColorSet::EMPTY; q], weights, 0)?;
    Ok(QuotientTree { tree, part_of: p.part_of.clone() })
}

/// `f(x∧y) = f(x)∧f(y)` for all `x, y` with `f(x) ≠ f(y)`.
pub fn is_weak_homomorphism<Q: MeetStructure>(f: &[usize], t: &TreeSemilattice, q: &Q) -> bool {
    let n = t.len();
    if f.len() != n || f.iter().any(|&x| x >= q.node_count()) {
        return false;
    }
    (0..n).all(|x| {
        (x + 1..n).all(|y: NodeId| f[x] == f[y] || f[t.meet(x, y)] == q.meet(f[x], f[y]))
    })
}
