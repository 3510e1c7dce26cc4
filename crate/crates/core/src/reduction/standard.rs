//! Standard f-reductions.
//!
//! Each part `P` becomes a small tree or forest `Y_P` whose nodes are
//! identified by a [`Role`]: the head `a_P` (types 1, 2), color buckets
//! `b_{P,γ}` (types 2, 3), spine nodes `a_{P,γ}` and legs `b_{P,γ,ρ}`
//! (type 4). The roots of `Y_P` hang below the head of the father part, or
//! below the last spine node when the father part is of type 4.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::partition::{quotient_tree, validate_partition, EpsPartition, Part, PartType};
use crate::rational::Rational;
use crate::tree::{ColorSet, MeetStructure, NodeId, TreeSemilattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Head,
    Bucket(ColorSet),
    Spine(ColorSet),
    Leg(ColorSet, ColorSet),
}

/// `π: T → T̂` together with everything needed to check it.
#[derive(Debug, Clone)]
pub struct ReductionMap {
    pub epsilon: Rational,
    pub source: TreeSemilattice,
    /// The partition of the source (`f`).
    pub partition: EpsPartition,
    pub target: TreeSemilattice,
    pub pi: Vec<NodeId>,
    /// `μ̂ = μ∘π⁻¹`, equal to the target's weights.
    pub pushed_measure: Vec<Rational>,
    /// `f̂`: part of each target node.
    pub target_part: Vec<usize>,
    /// `f̂` with part shapes, an ε-partition of `(T̂, μ̂)`.
    pub target_partition: EpsPartition,
    /// `(part, role)` of each target node.
    pub roles: Vec<(usize, Role)>,
}

impl ReductionMap {
    /// Target node with the given part and role.
    pub fn node_of(&self, part: usize, role: Role) -> Option<NodeId> {
        self.roles.iter().position(|&r| r == (part, role))
    }
}

struct Builder {
    roles: Vec<(usize, Role)>,
    colors: Vec<ColorSet>,
    weights: Vec<Rational>,
    parent: Vec<Option<NodeId>>,
    index: BTreeMap<(usize, Role), NodeId>,
}

impl Builder {
    fn node(&mut self, part: usize, role: Role, color: ColorSet, parent: Option<NodeId>) -> NodeId {
        if let Some(&id) = self.index.get(&(part, role)) {
            return id;
        }
        let id = self.roles.len();
        self.roles.push((part, role));
        self.colors.push(color);
        self.weights.push(Rational::zero());
        self.parent.push(parent);
        self.index.insert((part, role), id);
        id
    }
}

/// The standard f-reduction of `t` for the partition `p`.
pub fn standard_reduction(t: &TreeSemilattice, p: &EpsPartition) -> Result<ReductionMap> {
    let report = validate_partition(t, &p.epsilon, p);
    if let Some(v) = report.violations.first() {
        return Err(Error::Input(format!("invalid partition: {v}")));
    }
    let quotient = quotient_tree(t, p)?;
    let n = t.len();
    let mut b = Builder {
        roles: vec![],
        colors: vec![],
        weights: vec![],
        parent: vec![],
        index: BTreeMap::new(),
    };
    let mut pi = vec![usize::MAX; n];
    // Per part: roots of Y_P, the node children parts hang from, and the
    // shape of Y_P in the target partition (attach, spine).
    let mut roots: Vec<Vec<NodeId>> = Vec::with_capacity(p.len());
    let mut anchor: Vec<Option<NodeId>> = Vec::with_capacity(p.len());
    let mut spines: Vec<Vec<NodeId>> = Vec::with_capacity(p.len());

    for (i, part) in p.parts.iter().enumerate() {
        let kind = if part.members.len() == 1 { PartType::Singleton } else { part.kind };
        match kind {
            PartType::Singleton | PartType::Rooted => {
                let v = part.attach;
                let head = b.node(i, Role::Head, t.color(v), None);
                pi[v] = head;
                let present: BTreeSet<ColorSet> =
                    part.members.iter().filter(|&&u| u != v).map(|&u| t.color(u)).collect();
                for &c in &present {
                    b.node(i, Role::Bucket(c), c, Some(head));
                }
                for &u in part.members.iter().filter(|&&u| u != v) {
                    pi[u] = b.index[&(i, Role::Bucket(t.color(u)))];
                }
                roots.push(vec![head]);
                anchor.push(Some(head));
                spines.push(vec![]);
            }
            PartType::Forest => {
                let present: BTreeSet<ColorSet> = part.members.iter().map(|&u| t.color(u)).collect();
                let r: Vec<NodeId> = present.iter().map(|&c| b.node(i, Role::Bucket(c), c, None)).collect();
                for &u in &part.members {
                    pi[u] = b.index[&(i, Role::Bucket(t.color(u)))];
                }
                roots.push(r);
                anchor.push(None);
                spines.push(vec![]);
            }
            PartType::Segment => {
                let w = part.cut.expect("validated type-4 part has a cut vertex");
                let spine = spine_path(t, part.attach, w);
                let mut chain = Vec::new();
                for &s in &spine {
                    let c = t.color(s);
                    if !b.index.contains_key(&(i, Role::Spine(c))) {
                        let parent = chain.last().copied();
                        chain.push(b.node(i, Role::Spine(c), c, parent));
                    }
                    pi[s] = b.index[&(i, Role::Spine(c))];
                }
                let on_spine: BTreeSet<NodeId> = spine.iter().copied().collect();
                let legs: BTreeSet<(ColorSet, ColorSet)> = part
                    .members
                    .iter()
                    .filter(|u| !on_spine.contains(u))
                    .map(|&u| (t.color(t.meet(u, w)), t.color(u)))
                    .collect();
                for &(g, r) in &legs {
                    let s = b.index[&(i, Role::Spine(g))];
                    b.node(i, Role::Leg(g, r), r, Some(s));
                }
                for &u in part.members.iter().filter(|u| !on_spine.contains(u)) {
                    pi[u] = b.index[&(i, Role::Leg(t.color(t.meet(u, w)), t.color(u)))];
                }
                roots.push(vec![chain[0]]);
                anchor.push(chain.last().copied());
                spines.push(chain);
            }
        }
    }
    for (i, r) in roots.iter().enumerate() {
        if let Some(father) = quotient.tree.parent(i) {
            let at = anchor[father].ok_or_else(|| {
                Error::Invariant(format!("part {i} hangs below type-3 part {father}"))
            })?;
            for &x in r {
                b.parent[x] = Some(at);
            }
        }
    }
    for v in 0..n {
        b.weights[pi[v]] += t.weight(v);
    }
    let target = TreeSemilattice::new(b.parent, b.colors, b.weights.clone(), t.k())?;
    let target_part: Vec<usize> = b.roles.iter().map(|&(i, _)| i).collect();

    let mut tparts = Vec::with_capacity(p.len());
    for (i, part) in p.parts.iter().enumerate() {
        let mut members: Vec<NodeId> = (0..target.len()).filter(|&z| target_part[z] == i).collect();
        members.sort_unstable();
        let kind = if part.members.len() == 1 { PartType::Singleton } else { part.kind };
        let tp = match kind {
            PartType::Singleton | PartType::Rooted => Part {
                kind: if members.len() == 1 { PartType::Singleton } else { PartType::Rooted },
                attach: roots[i][0],
                cut: None,
                spine: vec![],
                members,
            },
            PartType::Forest if roots[i].len() == 1 => Part {
                kind: PartType::Singleton,
                attach: roots[i][0],
                cut: None,
                spine: vec![],
                members,
            },
            PartType::Forest => Part {
                kind: PartType::Forest,
                attach: target.parent(roots[i][0]).expect("forest roots hang below a head"),
                cut: None,
                spine: vec![],
                members,
            },
            PartType::Segment => Part {
                kind: PartType::Segment,
                attach: roots[i][0],
                cut: Some(pi[part.cut.expect("type-4 cut")]),
                spine: spines[i].clone(),
                members,
            },
        };
        tparts.push(tp);
    }
    let target_partition = EpsPartition::from_parts(p.epsilon.clone(), target.len(), tparts);
    Ok(ReductionMap {
        epsilon: p.epsilon.clone(),
        source: t.clone(),
        partition: p.clone(),
        pushed_measure: b.weights,
        target,
        pi,
        target_part,
        target_partition,
        roles: b.roles,
    })
}

/// Path from `v` to the father of `w`, top down.
fn spine_path(t: &TreeSemilattice, v: NodeId, w: NodeId) -> Vec<NodeId> {
    let mut path = Vec::new();
    let mut u = t.parent(w).expect("cut vertex is not the root");
    loop {
        path.push(u);
        if u == v {
            break;
        }
        u = t.parent(u).expect("attachment is an ancestor of the cut");
    }
    path.reverse();
    path
}
