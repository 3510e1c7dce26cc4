//! Checks of the f-reduction properties, marked isomorphism of projected tuples and
//! the `p²ε` pairing bound.

use std::fmt;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::partition::{quotient_tree, validate_partition};
use crate::qf::{stone_pairing_exact_with_budget, QfFormula};
use crate::rational::Rational;
use crate::reduction::ReductionMap;
use crate::substructure::type_encoding;
use crate::tree::{MeetStructure, NodeId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReductionViolation {
    Shape(String),
    Color { node: NodeId },
    Factorization { node: NodeId },
    Meet { x: NodeId, y: NodeId },
    Order { x: NodeId, y: NodeId },
    Measure { target: NodeId },
    TargetPartition(String),
    Quotient,
    SizeBound { size: usize, bound: usize },
}

impl fmt::Display for ReductionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionViolation::Shape(m) => write!(f, "malformed map: {m}"),
            ReductionViolation::Color { node } => write!(f, "pi changes the color of {node}"),
            ReductionViolation::Factorization { node } => {
                write!(f, "f({node}) differs from f_hat(pi({node}))")
            }
            ReductionViolation::Meet { x, y } => write!(f, "pi({x}^{y}) != pi({x})^pi({y})"),
            ReductionViolation::Order { x, y } => {
                write!(f, "order between {x} and {y} not preserved")
            }
            ReductionViolation::Measure { target } => {
                write!(f, "pushed measure wrong at target node {target}")
            }
            ReductionViolation::TargetPartition(m) => write!(f, "f_hat is not an epsilon-partition: {m}"),
            ReductionViolation::Quotient => write!(f, "T_hat/f_hat differs from T/f"),
            ReductionViolation::SizeBound { size, bound } => {
                write!(f, "|T_hat| = {size} exceeds C(C+1)|T_tilde| = {bound}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReductionReport {
    pub violations: Vec<ReductionViolation>,
    pub target_size: usize,
    pub size_bound: usize,
}

impl ReductionReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `C(C+1)|T̃|` with `C` the number of distinct color sets in the source.
pub fn size_bound(r: &ReductionMap) -> usize {
    let c = r.source.distinct_colors().len();
    c * (c + 1) * r.partition.len()
}

/// Exhaustive check of every f-reduction property; stops collecting
/// pairwise violations after the first hundred.
pub fn verify_reduction(r: &ReductionMap) -> ReductionReport {
    let t = &r.source;
    let th = &r.target;
    let f = &r.partition.part_of;
    let mut rep = ReductionReport {
        violations: vec![],
        target_size: th.len(),
        size_bound: size_bound(r),
    };
    if r.pi.len() != t.len() || r.pi.iter().any(|&z| z >= th.len()) || r.target_part.len() != th.len() {
        rep.violations.push(ReductionViolation::Shape("pi or f_hat has the wrong domain or range".into()));
        return rep;
    }
    for x in 0..t.len() {
        if th.color(r.pi[x]) != t.color(x) {
            rep.violations.push(ReductionViolation::Color { node: x });
        }
        if r.target_part[r.pi[x]] != f[x] {
            rep.violations.push(ReductionViolation::Factorization { node: x });
        }
    }
    let mut pair_violations = 0;
    'outer: for x in 0..t.len() {
        for y in 0..t.len() {
            if f[x] == f[y] {
                continue;
            }
            let (px, py) = (r.pi[x], r.pi[y]);
            if x < y && r.pi[t.meet(x, y)] != th.meet(px, py) {
                rep.violations.push(ReductionViolation::Meet { x, y });
                pair_violations += 1;
            }
            if t.leq(x, y) != th.leq(px, py) {
                rep.violations.push(ReductionViolation::Order { x, y });
                pair_violations += 1;
            }
            if pair_violations >= 100 {
                break 'outer;
            }
        }
    }
    let mut pushed = vec![Rational::default(); th.len()];
    for x in 0..t.len() {
        pushed[r.pi[x]] += t.weight(x);
    }
    for z in 0..th.len() {
        if pushed[z] != *th.weight(z) || r.pushed_measure.get(z) != Some(&pushed[z]) {
            rep.violations.push(ReductionViolation::Measure { target: z });
        }
    }
    if r.target_partition.part_of != r.target_part {
        rep.violations
            .push(ReductionViolation::TargetPartition("shape labels disagree with f_hat".into()));
    }
    for v in validate_partition(th, &r.epsilon, &r.target_partition).violations {
        rep.violations.push(ReductionViolation::TargetPartition(v.to_string()));
    }
    match (quotient_tree(t, &r.partition), quotient_tree(th, &r.target_partition)) {
        (Ok(a), Ok(b)) if a.tree.parents() == b.tree.parents() => {}
        _ => rep.violations.push(ReductionViolation::Quotient),
    }
    if rep.target_size > rep.size_bound {
        rep.violations.push(ReductionViolation::SizeBound { size: rep.target_size, bound: rep.size_bound });
    }
    rep
}

/// Whether `T<v_1..v_p>` and `T̂<π(v_1)..π(v_p)>` have the same marked
/// type. Requires `f(v_i) ≠ f(v_j)` whenever `v_i ≠ v_j`.
pub fn projected_substructure_isomorphism(r: &ReductionMap, tuple: &[NodeId]) -> Result<bool> {
    if tuple.is_empty() {
        return Err(Error::Input("empty tuple".into()));
    }
    for &v in tuple {
        r.source.check_node(v)?;
    }
    let f = &r.partition.part_of;
    for (i, &a) in tuple.iter().enumerate() {
        for &b in &tuple[i + 1..] {
            if a != b && f[a] == f[b] {
                return Err(Error::Input(format!(
                    "nodes {a} and {b} are distinct but share part {}",
                    f[a]
                )));
            }
        }
    }
    let image: Vec<NodeId> = tuple.iter().map(|&v| r.pi[v]).collect();
    Ok(type_encoding(&r.source, tuple) == type_encoding(&r.target, &image))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorCheck {
    pub lhs: Rational,
    pub rhs: Rational,
    /// `p²ε`.
    pub bound: Rational,
}

impl ErrorCheck {
    pub fn gap(&self) -> Rational {
        (&self.lhs - &self.rhs).abs()
    }

    pub fn holds(&self) -> bool {
        self.gap() < self.bound
    }
}

/// `⟨φ,(T,μ)⟩`, `⟨φ,(T̂,μ̂)⟩` and `p²ε`.
pub fn reduction_error_check(r: &ReductionMap, phi: &QfFormula, budget: u128) -> Result<ErrorCheck> {
    let lhs = stone_pairing_exact_with_budget(&r.source, phi, budget)?;
    let rhs = stone_pairing_exact_with_budget(&r.target, phi, budget)?;
    let p = phi.arity as i64;
    let bound = &r.epsilon * Rational::from_integer((p * p).into());
    Ok(ErrorCheck { lhs, rhs, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::eps_partition;
    use crate::qf::parse_formula;
    use crate::rational::ratio;
    use crate::reduction::standard_reduction;
    use crate::tree::{ColorSet, TreeSemilattice};

    fn sample_tree() -> TreeSemilattice {
        let c1 = ColorSet::from_colors([1]);
        let c2 = ColorSet::from_colors([2]);
        let parent = vec![None, Some(0), Some(1), Some(2), Some(3), Some(1), Some(0), Some(6), Some(6), Some(6), Some(4)];
        let colors = vec![c1, c2, c1, c2, c1, c2, c1, c1, c2, c2, c1];
        TreeSemilattice::uniform(parent, colors, 2).unwrap()
    }

    #[test]
    fn construction_passes_verification() {
        let t = sample_tree();
        for eps in [ratio(1, 2), ratio(1, 3), ratio(1, 5), ratio(1, 11)] {
            let p = eps_partition(&t, &eps).unwrap();
            let r = standard_reduction(&t, &p).unwrap();
            let rep = verify_reduction(&r);
            assert!(rep.is_valid(), "{eps}: {:?}", rep.violations);
        }
    }

    #[test]
    fn collapsed_colors_detected() {
        let t = sample_tree();
        let p = eps_partition(&t, &ratio(1, 3)).unwrap();
        let mut r = standard_reduction(&t, &p).unwrap();
        // Send a node to a target node of another color in the same part.
        let x = (0..t.len())
            .find(|&x| {
                (0..r.target.len())
                    .any(|z| r.target_part[z] == p.part_of[x] && r.target.color(z) != t.color(x))
            })
            .unwrap();
        let z = (0..r.target.len())
            .find(|&z| r.target_part[z] == p.part_of[x] && r.target.color(z) != t.color(x))
            .unwrap();
        r.pi[x] = z;
        let rep = verify_reduction(&r);
        assert!(rep.violations.iter().any(|v| matches!(v, ReductionViolation::Color { .. })));
    }

    #[test]
    fn broken_order_detected() {
        let t = TreeSemilattice::chain(4);
        let p = eps_partition(&t, &ratio(1, 4)).unwrap();
        let mut r = standard_reduction(&t, &p).unwrap();
        // Swap images of two comparable nodes in different parts.
        r.pi.swap(0, 3);
        let rep = verify_reduction(&r);
        assert!(rep.violations.iter().any(|v| matches!(v, ReductionViolation::Order { .. })));
    }

    #[test]
    fn projected_tuples_are_isomorphic() {
        let t = sample_tree();
        let p = eps_partition(&t, &ratio(1, 3)).unwrap();
        let r = standard_reduction(&t, &p).unwrap();
        for v in 0..t.len() {
            assert!(projected_substructure_isomorphism(&r, &[v]).unwrap());
        }
        let f = &p.part_of;
        for a in 0..t.len() {
            for b in 0..t.len() {
                for c in 0..t.len() {
                    let tuple = [a, b, c];
                    let distinct = tuple.iter().enumerate().all(|(i, &x)| {
                        tuple[i + 1..].iter().all(|&y| x == y || f[x] != f[y])
                    });
                    if distinct {
                        assert!(projected_substructure_isomorphism(&r, &tuple).unwrap());
                    } else {
                        assert!(projected_substructure_isomorphism(&r, &tuple).is_err());
                    }
                }
            }
        }
    }

    #[test]
    fn arity_one_gap_is_zero() {
        let t = sample_tree();
        let p = eps_partition(&t, &ratio(1, 3)).unwrap();
        let r = standard_reduction(&t, &p).unwrap();
        for text in ["M1(x1)", "M2(x1)", "M1(x1) & M2(x1)", "x1 = x1"] {
            let phi = parse_formula(text, 1, 2).unwrap();
            let c = reduction_error_check(&r, &phi, 1_000_000).unwrap();
            assert_eq!(c.gap(), ratio(0, 1));
            assert!(c.holds());
        }
        let c = reduction_error_check(&r, &QfFormula::incomparable_pair(), 1_000_000).unwrap();
        assert_eq!(c.bound, ratio(4, 3));
        assert!(c.holds());
    }
}
