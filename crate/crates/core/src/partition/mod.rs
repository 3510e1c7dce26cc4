//! ε-partitions of weighted tree-semilattices.

mod construct;
mod quotient;
mod validate;

use std::fmt;

use crate::rational::Rational;
use crate::tree::NodeId;

pub use construct::{classify_all, classify_vertex, eps_partition, refine_partition};
pub use quotient::{is_weak_homomorphism, quotient_tree, QuotientTree};
pub use validate::{infer_partition, validate_partition, PartitionReport, PartitionViolation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexClass {
    Light,
    Singular,
    Chaining,
    Branching,
}

/// The four part shapes, for some attachment vertex `v`:
/// `{v}`; `{v} ∪ ⋃_{x∈F} T_x` with `∅ ≠ F ⊆ F_v`; `⋃_{x∈F} T_x` with
/// `F ⊆ F_v`, `|F| >= 2`; `T_v \ T_w` with `w > v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PartType {
    Singleton = 1,
    Rooted = 2,
    Forest = 3,
    Segment = 4,
}

impl PartType {
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(PartType::Singleton),
            2 => Some(PartType::Rooted),
            3 => Some(PartType::Forest),
            4 => Some(PartType::Segment),
            _ => None,
        }
    }
}

impl fmt::Display for PartType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part {
    pub kind: PartType,
    pub attach: NodeId,
    /// Type 4 only.
    pub cut: Option<NodeId>,
    /// Type 4 only: the path from the attachment vertex to the father of
    /// the cut vertex.
    pub spine: Vec<NodeId>,
    /// Sorted node ids.
    pub members: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsPartition {
    pub epsilon: Rational,
    pub part_of: Vec<usize>,
    pub parts: Vec<Part>,
}

impl EpsPartition {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Builds `part_of` from the parts' member lists.
    pub fn from_parts(epsilon: Rational, node_count: usize, parts: Vec<Part>) -> Self {
        let mut part_of = vec![usize::MAX; node_count];
        for (i, p) in parts.iter().enumerate() {
            for &v in &p.members {
                if v < node_count {
                    part_of[v] = i;
                }
            }
        }
        EpsPartition { epsilon, part_of, parts }
    }

    /// Whether every part of `self` lies inside a part of `coarse`.
    pub fn refines(&self, coarse: &EpsPartition) -> bool {
        self.parts.iter().all(|p| {
            let q = coarse.part_of[p.members[0]];
            p.members.iter().all(|&v| coarse.part_of[v] == q)
        })
    }
}
