//! Checking ε-partitions, and recovering part shapes from a bare labeling.

use std::fmt;

use crate::error::{Error, Result};
use crate::partition::{EpsPartition, Part, PartType};
use crate::rational::Rational;
use crate::tree::{NodeId, TreeSemilattice};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionViolation {
    /// `part_of` or the member lists do not describe a partition.
    NotAPartition { node: NodeId },
    /// The part does not have the shape of its declared type.
    Shape { part: usize, reason: String },
    /// A type-3 part whose attachment vertex heads no type-1/2 part.
    DanglingForest { part: usize, attach: NodeId },
    /// A non-singleton part heavier than ε.
    TooHeavy { part: usize, measure: Rational },
}

impl fmt::Display for PartitionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionViolation::NotAPartition { node } => {
                write!(f, "node {node} is not in exactly one part")
            }
            PartitionViolation::Shape { part, reason } => write!(f, "part {part}: {reason}"),
            PartitionViolation::DanglingForest { part, attach } => write!(
                f,
                "part {part}: type-3 attachment vertex {attach} is not the attachment of a type-1/2 part"
            ),
            PartitionViolation::TooHeavy { part, measure } => {
                write!(f, "part {part}: measure {measure} exceeds epsilon")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartitionReport {
    pub violations: Vec<PartitionViolation>,
}

impl PartitionReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn sorted_subtree_union(t: &TreeSemilattice, roots: &[NodeId], extra: Option<NodeId>) -> Vec<NodeId> {
    let mut s: Vec<NodeId> = roots.iter().flat_map(|&x| t.subtree_nodes(x)).collect();
    s.extend(extra);
    s.sort_unstable();
    s
}

/// Why `part` does not have its declared shape, if it does not.
fn shape_error(t: &TreeSemilattice, part: &Part, in_part: &[bool]) -> Option<String> {
    let v = part.attach;
    if v >= t.len() {
        return Some(format!("attachment vertex {v} out of range"));
    }
    let members = &part.members;
    let inside: Vec<NodeId> = t.children(v).iter().copied().filter(|&c| in_part[c]).collect();
    match part.kind {
        PartType::Singleton => (members != &[v]).then(|| format!("type 1 must be exactly {{{v}}}")),
        PartType::Rooted => {
            if members == &[v] {
                // Singletons may carry either label.
                return None;
            }
            if !in_part[v] {
                return Some(format!("type 2 must contain its attachment vertex {v}"));
            }
            (sorted_subtree_union(t, &inside, Some(v)) != *members)
                .then(|| format!("type 2 is not {{{v}}} plus whole subtrees of children of {v}"))
        }
        PartType::Forest => {
            if in_part[v] {
                return Some(format!("type 3 must not contain its attachment vertex {v}"));
            }
            if inside.len() < 2 {
                return Some(format!("type 3 needs at least two children of {v}"));
            }
            (sorted_subtree_union(t, &inside, None) != *members)
                .then(|| format!("type 3 is not a union of subtrees of children of {v}"))
        }
        PartType::Segment => {
            let w = match part.cut {
                Some(w) if w < t.len() => w,
                _ => return Some("type 4 needs a valid cut vertex".into()),
            };
            if w == v || !t.leq(v, w) {
                return Some(format!("cut vertex {w} is not strictly above {v}"));
            }
            let mut expect: Vec<NodeId> =
                t.subtree_nodes(v).into_iter().filter(|&u| !t.leq(w, u)).collect();
            expect.sort_unstable();
            if expect != *members {
                return Some(format!("type 4 is not T_{v} minus T_{w}"));
            }
            if !part.spine.is_empty() {
                let mut path = Vec::new();
                let mut u = t.parent(w).expect("w is above v");
                loop {
                    path.push(u);
                    if u == v {
                        break;
                    }
                    u = t.parent(u).expect("v is an ancestor");
                }
                path.reverse();
                if path != part.spine {
                    return Some("spine is not the path from the attachment to the cut's father".into());
                }
            }
            None
        }
    }
}

/// Checks every condition of an ε-partition and reports all violations.
pub fn validate_partition(t: &TreeSemilattice, eps: &Rational, p: &EpsPartition) -> PartitionReport {
    let n = t.len();
    let mut report = PartitionReport::default();
    let mut owner = vec![usize::MAX; n];
    for (i, part) in p.parts.iter().enumerate() {
        for &v in &part.members {
            if v >= n || owner[v] != usize::MAX {
                report.violations.push(PartitionViolation::NotAPartition { node: v });
            } else {
                owner[v] = i;
            }
        }
    }
    for v in 0..n {
        if owner[v] == usize::MAX || p.part_of.get(v) != Some(&owner[v]) {
            report.violations.push(PartitionViolation::NotAPartition { node: v });
        }
    }
    if !report.is_valid() {
        return report;
    }
    let heads: Vec<NodeId> = p
        .parts
        .iter()
        .filter(|q| matches!(q.kind, PartType::Singleton | PartType::Rooted))
        .map(|q| q.attach)
        .collect();
    let mut in_part = vec![false; n];
    for (i, part) in p.parts.iter().enumerate() {
        let mut sorted = part.members.clone();
        sorted.sort_unstable();
        let part = Part { members: sorted, ..part.clone() };
        for &v in &part.members {
            in_part[v] = true;
        }
        if let Some(reason) = shape_error(t, &part, &in_part) {
            report.violations.push(PartitionViolation::Shape { part: i, reason });
        }
        for &v in &part.members {
            in_part[v] = false;
        }
        if part.kind == PartType::Forest && !heads.contains(&part.attach) {
            report.violations.push(PartitionViolation::DanglingForest { part: i, attach: part.attach });
        }
        if part.members.len() > 1 {
            let measure: Rational = part.members.iter().map(|&v| t.weight(v)).sum();
            if &measure > eps {
                report.violations.push(PartitionViolation::TooHeavy { part: i, measure });
            }
        }
    }
    report
}

/// Recovers an [`EpsPartition`] from part labels by recognizing each
/// part's shape. `hints` gives a preferred type per label, used when a part
/// fits several shapes. The result is not validated.
pub fn infer_partition(
    t: &TreeSemilattice,
    eps: &Rational,
    labels: &[usize],
    hints: Option<&[PartType]>,
) -> Result<EpsPartition> {
    let n = t.len();
    if labels.len() != n {
        return Err(Error::Input("label vector length differs from node count".into()));
    }
    let count = labels.iter().max().map_or(0, |m| m + 1);
    let mut groups: Vec<Vec<NodeId>> = vec![Vec::new(); count];
    for (v, &l) in labels.iter().enumerate() {
        groups[l].push(v);
    }
    let mut in_part = vec![false; n];
    let mut parts = Vec::with_capacity(count);
    for (label, members) in groups.into_iter().enumerate() {
        if members.is_empty() {
            return Err(Error::Input(format!("part label {label} is unused")));
        }
        for &v in &members {
            in_part[v] = true;
        }
        let roots: Vec<NodeId> = members
            .iter()
            .copied()
            .filter(|&v| t.parent(v).is_none_or(|p| !in_part[p]))
            .collect();
        let mut candidates: Vec<Part> = Vec::new();
        if members.len() == 1 {
            candidates.push(Part {
                kind: PartType::Singleton,
                attach: members[0],
                cut: None,
                spine: vec![],
                members: members.clone(),
            });
        } else if roots.len() == 1 {
            let r = roots[0];
            candidates.push(Part { kind: PartType::Rooted, attach: r, cut: None, spine: vec![], members: members.clone() });
            let boundary: Vec<NodeId> = members
                .iter()
                .flat_map(|&u| t.children(u).iter().copied())
                .filter(|&c| !in_part[c])
                .collect();
            if boundary.len() == 1 {
                let w = boundary[0];
                let mut spine = Vec::new();
                let mut u = t.parent(w).expect("boundary node has a father");
                loop {
                    spine.push(u);
                    if u == r {
                        break;
                    }
                    match t.parent(u) {
                        Some(p) => u = p,
                        None => break,
                    }
                }
                spine.reverse();
                candidates.push(Part { kind: PartType::Segment, attach: r, cut: Some(w), spine, members: members.clone() });
            }
        } else if let Some(v) = t.parent(roots[0]) {
            candidates.push(Part { kind: PartType::Forest, attach: v, cut: None, spine: vec![], members: members.clone() });
        }
        if let Some(h) = hints.and_then(|h| h.get(label)) {
            candidates.sort_by_key(|c| c.kind != *h);
        }
        let chosen = candidates.into_iter().find(|c| shape_error(t, c, &in_part).is_none());
        for &v in &members {
            in_part[v] = false;
        }
        parts.push(chosen.ok_or_else(|| {
            Error::Invariant(format!("part {label} matches none of the four shapes"))
        })?);
    }
    Ok(EpsPartition::from_parts(eps.clone(), n, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::eps_partition;
    use crate::rational::ratio;

    fn part(kind: PartType, attach: NodeId, cut: Option<NodeId>, members: Vec<NodeId>) -> Part {
        Part { kind, attach, cut, spine: vec![], members }
    }

    #[test]
    fn heavy_part_flagged() {
        let t = TreeSemilattice::chain(4);
        let p = EpsPartition::from_parts(
            ratio(1, 4),
            4,
            vec![part(PartType::Segment, 0, Some(3), vec![0, 1, 2]), part(PartType::Singleton, 3, None, vec![3])],
        );
        let r = validate_partition(&t, &ratio(1, 4), &p);
        assert_eq!(r.violations, vec![PartitionViolation::TooHeavy { part: 0, measure: ratio(3, 4) }]);
        assert!(validate_partition(&t, &ratio(3, 4), &p).is_valid());
    }

    #[test]
    fn dangling_forest_flagged() {
        // Root 0 sits inside a segment, so the forest attached at 0 has no
        // type-1/2 head.
        let t = TreeSemilattice::uniform(
            vec![None, Some(0), Some(0), Some(0)],
            vec![crate::tree::ColorSet::EMPTY; 4],
            0,
        )
        .unwrap();
        let p = EpsPartition::from_parts(
            ratio(1, 2),
            4,
            vec![part(PartType::Segment, 0, Some(1), vec![0]), part(PartType::Singleton, 1, None, vec![1]), part(PartType::Forest, 0, None, vec![2, 3])],
        );
        let r = validate_partition(&t, &ratio(1, 2), &p);
        assert!(r.violations.contains(&PartitionViolation::DanglingForest { part: 2, attach: 0 }));
    }

    #[test]
    fn wrong_shapes_flagged() {
        let t = TreeSemilattice::chain(3);
        let p = EpsPartition::from_parts(
            ratio(1, 1),
            3,
            vec![part(PartType::Singleton, 0, None, vec![0, 2]), part(PartType::Singleton, 1, None, vec![1])],
        );
        let r = validate_partition(&t, &ratio(1, 1), &p);
        assert!(matches!(r.violations[0], PartitionViolation::Shape { part: 0, .. }));
        let mut missing = p.clone();
        missing.parts[0].members = vec![0];
        assert!(matches!(
            validate_partition(&t, &ratio(1, 1), &missing).violations[0],
            PartitionViolation::NotAPartition { .. }
        ));
    }

    #[test]
    fn inference_recovers_construction() {
        let t = TreeSemilattice::star(30);
        let p = eps_partition(&t, &ratio(1, 5)).unwrap();
        let hints: Vec<PartType> = p.parts.iter().map(|q| q.kind).collect();
        let q = infer_partition(&t, &ratio(1, 5), &p.part_of, Some(&hints)).unwrap();
        assert_eq!(p, q);
        let c = TreeSemilattice::chain(10);
        let p = eps_partition(&c, &ratio(1, 2)).unwrap();
        let hints: Vec<PartType> = p.parts.iter().map(|q| q.kind).collect();
        assert_eq!(infer_partition(&c, &ratio(1, 2), &p.part_of, Some(&hints)).unwrap(), p);
    }
}
