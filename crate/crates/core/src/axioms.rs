//! Exhaustive checking of the tree-semilattice axioms on a meet table.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tree::{MeetStructure, NodeId, TreeSemilattice};

/// Structures up to this size are checked over every triple.
pub const EXHAUSTIVE_LIMIT: usize = 60;
const RANDOM_TRIPLES: usize = 200_000;

/// An explicit binary operation on `0..n`, used to check axioms of tables
/// that do not come from a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeetTable {
    n: usize,
    table: Vec<NodeId>,
}

impl MeetTable {
    pub fn from_fn(n: usize, f: impl Fn(NodeId, NodeId) -> NodeId) -> Self {
        let mut table = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                table.push(f(x, y));
            }
        }
        MeetTable { n, table }
    }

    pub fn of<S: MeetStructure>(s: &S) -> Self {
        MeetTable::from_fn(s.node_count(), |x, y| s.meet(x, y))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, x: NodeId, y: NodeId) -> NodeId {
        self.table[x * self.n + y]
    }

    pub fn set(&mut self, x: NodeId, y: NodeId, v: NodeId) {
        self.table[x * self.n + y] = v;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxiomViolation {
    OutOfRange { x: NodeId, y: NodeId },
    Idempotence { x: NodeId },
    Commutativity { x: NodeId, y: NodeId },
    Associativity { x: NodeId, y: NodeId, z: NodeId },
    /// `x∧y`, `x∧z`, `y∧z` are pairwise distinct.
    ThreeElement { x: NodeId, y: NodeId, z: NodeId },
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AxiomViolation::OutOfRange { x, y } => write!(f, "{x}∧{y} is not a node"),
            AxiomViolation::Idempotence { x } => write!(f, "idempotence fails at {x}"),
            AxiomViolation::Commutativity { x, y } => {
                write!(f, "commutativity fails at ({x}, {y})")
            }
            AxiomViolation::Associativity { x, y, z } => {
                write!(f, "associativity fails at ({x}, {y}, {z})")
            }
            AxiomViolation::ThreeElement { x, y, z } => {
                write!(f, "x∧y, x∧z, y∧z pairwise distinct at ({x}, {y}, {z})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub exhaustive: bool,
    pub triples_checked: u64,
    pub violation: Option<AxiomViolation>,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

fn check_triple(t: &MeetTable, x: NodeId, y: NodeId, z: NodeId) -> Option<AxiomViolation> {
    let xy = t.get(x, y);
    let xz = t.get(x, z);
    let yz = t.get(y, z);
    if xy != xz && xy != yz && xz != yz {
        return Some(AxiomViolation::ThreeElement { x, y, z });
    }
    if t.get(xy, z) != t.get(x, yz) {
        return Some(AxiomViolation::Associativity { x, y, z });
    }
    None
}

fn check_pairs(t: &MeetTable) -> Option<AxiomViolation> {
    let n = t.len();
    for x in 0..n {
        if t.get(x, x) != x {
            return Some(AxiomViolation::Idempotence { x });
        }
        for y in 0..n {
            if t.get(x, y) >= n {
                return Some(AxiomViolation::OutOfRange { x, y });
            }
            if t.get(x, y) != t.get(y, x) {
                return Some(AxiomViolation::Commutativity { x, y });
            }
        }
    }
    None
}

/// Checks idempotence, commutativity, associativity and the 3-element
/// condition over every triple of the table.
pub fn validate_meet_table(t: &MeetTable) -> AxiomReport {
    let n = t.len();
    let mut report = AxiomReport { exhaustive: true, triples_checked: 0, violation: check_pairs(t) };
    if report.violation.is_some() {
        return report;
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                report.triples_checked += 1;
                if let Some(v) = check_triple(t, x, y, z) {
                    report.violation = Some(v);
                    return report;
                }
            }
        }
    }
    report
}

/// Validates the meet of a structure: every triple when `|T| <=` 60,
/// otherwise all pairs plus 200 000 seeded random triples.
pub fn validate_axioms(t: &TreeSemilattice) -> AxiomReport {
    let table = MeetTable::of(t);
    if t.len() <= EXHAUSTIVE_LIMIT {
        return validate_meet_table(&table);
    }
    let mut report =
        AxiomReport { exhaustive: false, triples_checked: 0, violation: check_pairs(&table) };
    if report.violation.is_some() {
        return report;
    }
    let n = t.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_a710);
    for _ in 0..RANDOM_TRIPLES {
        let (x, y, z) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        report.triples_checked += 1;
        if let Some(v) = check_triple(&table, x, y, z) {
            report.violation = Some(v);
            break;
        }
    }
    report
}
