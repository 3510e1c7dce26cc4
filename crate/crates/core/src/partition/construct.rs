//! The greedy two-phase ε-partition and its refinement.
//!
//! Phase 1 puts every singular vertex alone and packs the subtrees of its
//! light children first-fit in decreasing order of measure; chaining and
//! branching vertices take their light-children subtrees with them. Phase 2
//! walks each maximal run of chaining vertices from the root downwards and
//! merges consecutive parts while the total stays within ε.
//!
//! Refinement runs the same construction inside each part, on absolute
//! measures, with the part's root handled so that every produced part is
//! also a part of the right shape in the whole tree.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::partition::{EpsPartition, Part, PartType, VertexClass};
use crate::rational::Rational;
use crate::tree::{NodeId, TreeSemilattice};

fn check_eps(eps: &Rational) -> Result<()> {
    if !eps.is_positive() || *eps > Rational::one() {
        return Err(Error::Input(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    Ok(())
}

/// The class of each vertex from its subtree measure `m_v` and the
/// subtree measures of its children.
fn class_of(m_v: &Rational, child_measures: &[&Rational], eps: &Rational) -> VertexClass {
    if m_v < eps {
        return VertexClass::Light;
    }
    let mut rest = m_v.clone();
    let mut heavy = 0;
    for &c in child_measures {
        if c >= eps {
            rest -= c;
            heavy += 1;
        }
    }
    if rest >= *eps {
        VertexClass::Singular
    } else if heavy == 1 {
        VertexClass::Chaining
    } else {
        VertexClass::Branching
    }
}

pub fn classify_all(t: &TreeSemilattice, eps: &Rational) -> Vec<VertexClass> {
    let m = t.subtree_measures();
    (0..t.len())
        .map(|v| {
            let cm: Vec<&Rational> = t.children(v).iter().map(|&c| &m[c]).collect();
            class_of(&m[v], &cm, eps)
        })
        .collect()
}

pub fn classify_vertex(t: &TreeSemilattice, eps: &Rational, v: NodeId) -> Result<VertexClass> {
    t.check_node(v)?;
    check_eps(eps)?;
    Ok(classify_all(t, eps)[v])
}

/// A tree on which the construction runs: the whole structure, or one part
/// with possibly an extra node.
struct Local {
    /// Host node of each local node. A phantom leaf maps to the host node
    /// it stands in for.
    host: Vec<NodeId>,
    /// Local nodes whose singleton parts are discarded afterwards.
    dropped: Vec<bool>,
    children: Vec<Vec<usize>>,
    weight: Vec<Rational>,
    root: usize,
    preorder: Vec<usize>,
}

impl Local {
    fn finish(
        host: Vec<NodeId>,
        dropped: Vec<bool>,
        parent: Vec<Option<usize>>,
        weight: Vec<Rational>,
    ) -> Self {
        let n = host.len();
        let mut children = vec![Vec::new(); n];
        let mut root = 0;
        for (v, p) in parent.iter().enumerate() {
            match p {
                Some(p) => children[*p].push(v),
                None => root = v,
            }
        }
        for c in &mut children {
            c.sort_by_key(|&x| host[x]);
        }
        let mut preorder = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            preorder.push(v);
            stack.extend(children[v].iter().rev());
        }
        Local { host, dropped, children, weight, root, preorder }
    }

    fn whole(t: &TreeSemilattice) -> Self {
        Local::finish(
            (0..t.len()).collect(),
            vec![false; t.len()],
            t.parents().to_vec(),
            t.weights().to_vec(),
        )
    }

    /// The subtree induced on `members` (which must have a unique minimum),
    /// plus optional extra nodes `(host, parent host, weight)`, dropped
    /// after construction.
    fn induced(
        t: &TreeSemilattice,
        members: &[NodeId],
        extra_root: Option<NodeId>,
        extra_leaf: Option<(NodeId, NodeId, Rational)>,
    ) -> Self {
        let mut host: Vec<NodeId> = Vec::new();
        let mut dropped = Vec::new();
        let mut weight = Vec::new();
        if let Some(r) = extra_root {
            host.push(r);
            dropped.push(true);
            weight.push(Rational::zero());
        }
        for &v in members {
            host.push(v);
            dropped.push(false);
            weight.push(t.weight(v).clone());
        }
        let index = |h: NodeId, host: &[NodeId]| host.iter().position(|&x| x == h);
        let mut parent: Vec<Option<usize>> = host
            .iter()
            .map(|&h| t.parent(h).and_then(|p| index(p, &host)))
            .collect();
        if extra_root.is_some() {
            parent[0] = None;
        }
        if let Some((w, father, m)) = extra_leaf {
            let f = index(father, &host);
            host.push(w);
            dropped.push(true);
            weight.push(m);
            parent.push(f);
        }
        Local::finish(host, dropped, parent, weight)
    }

    fn len(&self) -> usize {
        self.host.len()
    }

    fn subtree_measures(&self) -> Vec<Rational> {
        let mut m = self.weight.clone();
        for &v in self.preorder.iter().rev() {
            for &c in &self.children[v] {
                let mc = m[c].clone();
                m[v] += mc;
            }
        }
        m
    }

    fn subtree(&self, v: usize, out: &mut Vec<usize>) {
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(&self.children[u]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RootMode {
    Free,
    /// The root may not start a merged chain (it has siblings' subtrees
    /// outside the local tree).
    Pinned,
    /// The root is treated as singular regardless of measure.
    ForcedSingular,
}

struct LocalPart {
    kind: PartType,
    attach: usize,
    cut: Option<usize>,
    spine: Vec<usize>,
    members: Vec<usize>,
}

fn construct(local: &Local, eps: &Rational, mode: RootMode) -> Vec<LocalPart> {
    let n = local.len();
    let m = local.subtree_measures();
    let mut class: Vec<VertexClass> = (0..n)
        .map(|v| {
            let cm: Vec<&Rational> = local.children[v].iter().map(|&c| &m[c]).collect();
            class_of(&m[v], &cm, eps)
        })
        .collect();
    let root = local.root;
    if mode == RootMode::ForcedSingular {
        class[root] = VertexClass::Singular;
    } else if class[root] == VertexClass::Light {
        let mut members = Vec::new();
        local.subtree(root, &mut members);
        let kind = if members.len() == 1 { PartType::Singleton } else { PartType::Rooted };
        return vec![LocalPart { kind, attach: root, cut: None, spine: vec![], members }];
    }

    let mut parts: Vec<LocalPart> = Vec::new();
    // Phase-1 part headed by each chaining vertex.
    let mut chain_part: Vec<Option<usize>> = vec![None; n];
    for &v in &local.preorder {
        let light: Vec<usize> = local.children[v]
            .iter()
            .copied()
            .filter(|&c| class[c] == VertexClass::Light)
            .collect();
        match class[v] {
            VertexClass::Light => {}
            VertexClass::Singular => {
                parts.push(LocalPart {
                    kind: PartType::Singleton,
                    attach: v,
                    cut: None,
                    spine: vec![],
                    members: vec![v],
                });
                let mut items = light;
                items.sort_by(|&a, &b| m[b].cmp(&m[a]).then(local.host[a].cmp(&local.host[b])));
                let mut bins: Vec<(Rational, Vec<usize>)> = Vec::new();
                for x in items {
                    match bins.iter_mut().find(|(s, _)| &(s.clone() + &m[x]) <= eps) {
                        Some((s, b)) => {
                            *s += &m[x];
                            b.push(x);
                        }
                        None => bins.push((m[x].clone(), vec![x])),
                    }
                }
                for (_, group) in bins {
                    let mut members = Vec::new();
                    for &x in &group {
                        local.subtree(x, &mut members);
                    }
                    let part = if group.len() >= 2 {
                        LocalPart { kind: PartType::Forest, attach: v, cut: None, spine: vec![], members }
                    } else if members.len() == 1 {
                        LocalPart { kind: PartType::Singleton, attach: group[0], cut: None, spine: vec![], members }
                    } else {
                        LocalPart { kind: PartType::Rooted, attach: group[0], cut: None, spine: vec![], members }
                    };
                    parts.push(part);
                }
            }
            VertexClass::Chaining | VertexClass::Branching => {
                let mut members = vec![v];
                for &x in &light {
                    local.subtree(x, &mut members);
                }
                let kind = if light.is_empty() { PartType::Singleton } else { PartType::Rooted };
                if class[v] == VertexClass::Chaining {
                    chain_part[v] = Some(parts.len());
                }
                parts.push(LocalPart { kind, attach: v, cut: None, spine: vec![], members });
            }
        }
    }

    // Phase 2: merge along maximal chaining runs, root to leaf.
    let eligible = |v: usize| {
        class[v] == VertexClass::Chaining && !(v == root && mode != RootMode::Free)
    };
    let heavy_child = |v: usize| {
        *local.children[v]
            .iter()
            .find(|&&c| class[c] != VertexClass::Light)
            .expect("chaining vertex has a non-light child")
    };
    let mut parent = vec![None; n];
    for v in 0..n {
        for &c in &local.children[v] {
            parent[c] = Some(v);
        }
    }
    let mut merged_away = vec![false; parts.len()];
    let mut new_parts = Vec::new();
    for &start in &local.preorder {
        if !eligible(start) || parent[start].is_some_and(eligible) {
            continue;
        }
        let mut run = vec![start];
        let mut next = heavy_child(start);
        while eligible(next) {
            run.push(next);
            next = heavy_child(next);
        }
        let part_measure = |v: usize| -> Rational {
            let idx = chain_part[v].unwrap();
            parts[idx].members.iter().map(|&u| &local.weight[u]).sum()
        };
        let mut segments: Vec<Vec<usize>> = Vec::new();
        let mut acc = Rational::zero();
        for &c in &run {
            let mc = part_measure(c);
            match segments.last_mut() {
                Some(seg) if &(acc.clone() + &mc) <= eps => {
                    seg.push(c);
                    acc += mc;
                }
                _ => {
                    segments.push(vec![c]);
                    acc = mc;
                }
            }
        }
        for seg in segments {
            if seg.len() < 2 {
                continue;
            }
            let mut members = Vec::new();
            for &c in &seg {
                let idx = chain_part[c].unwrap();
                merged_away[idx] = true;
                members.extend_from_slice(&parts[idx].members);
            }
            let last = *seg.last().unwrap();
            new_parts.push(LocalPart {
                kind: PartType::Segment,
                attach: seg[0],
                cut: Some(heavy_child(last)),
                spine: seg,
                members,
            });
        }
    }
    let mut out: Vec<LocalPart> = parts
        .into_iter()
        .zip(merged_away)
        .filter_map(|(p, gone)| (!gone).then_some(p))
        .collect();
    out.extend(new_parts);
    out
}

fn to_host(local: &Local, parts: Vec<LocalPart>) -> Result<Vec<Part>> {
    let mut out = Vec::new();
    for p in parts {
        if p.members.iter().any(|&u| local.dropped[u]) {
            if p.members.len() != 1 {
                return Err(Error::Invariant(
                    "auxiliary node ended up in a non-singleton part".into(),
                ));
            }
            continue;
        }
        let mut members: Vec<NodeId> = p.members.iter().map(|&u| local.host[u]).collect();
        members.sort_unstable();
        out.push(Part {
            kind: p.kind,
            attach: local.host[p.attach],
            cut: p.cut.map(|c| local.host[c]),
            spine: p.spine.iter().map(|&u| local.host[u]).collect(),
            members,
        });
    }
    Ok(out)
}

fn assemble(t: &TreeSemilattice, eps: &Rational, mut parts: Vec<Part>) -> EpsPartition {
    let mut pos = vec![0; t.len()];
    for (i, &v) in t.preorder().iter().enumerate() {
        pos[v] = i;
    }
    parts.sort_by_key(|p| p.members.iter().map(|&v| pos[v]).min());
    EpsPartition::from_parts(eps.clone(), t.len(), parts)
}

/// The greedy ε-partition.
pub fn eps_partition(t: &TreeSemilattice, eps: &Rational) -> Result<EpsPartition> {
    check_eps(eps)?;
    let local = Local::whole(t);
    let parts = to_host(&local, construct(&local, eps, RootMode::Free))?;
    Ok(assemble(t, eps, parts))
}

/// An ε′-partition refining `coarse`, built part by part.
pub fn refine_partition(
    t: &TreeSemilattice,
    eps_fine: &Rational,
    coarse: &EpsPartition,
) -> Result<EpsPartition> {
    check_eps(eps_fine)?;
    if eps_fine >= &coarse.epsilon {
        return Err(Error::Input(format!(
            "refinement needs ε′ < ε, got ε′ = {eps_fine} and ε = {}",
            coarse.epsilon
        )));
    }
    if coarse.part_of.len() != t.len() {
        return Err(Error::Input("partition does not match the structure".into()));
    }
    let mut parts = Vec::new();
    for p in &coarse.parts {
        if p.members.len() == 1 {
            parts.push(Part {
                kind: PartType::Singleton,
                attach: p.members[0],
                cut: None,
                spine: vec![],
                members: p.members.clone(),
            });
            continue;
        }
        let (local, mode) = match p.kind {
            PartType::Singleton => {
                return Err(Error::Input(format!(
                    "part with attachment {} is labeled type 1 but has {} members",
                    p.attach,
                    p.members.len()
                )))
            }
            PartType::Rooted => {
                // The head keeps its own node in the reduction, so it may
                // not be merged into a chain.
                let mode = RootMode::Pinned;
                (Local::induced(t, &p.members, None, None), mode)
            }
            PartType::Forest => {
                (Local::induced(t, &p.members, Some(p.attach), None), RootMode::ForcedSingular)
            }
            PartType::Segment => {
                let w = p.cut.ok_or_else(|| Error::Input("type-4 part without cut vertex".into()))?;
                let father = t.father(w)?;
                let phantom = (w, father, eps_fine.clone());
                (Local::induced(t, &p.members, None, Some(phantom)), RootMode::Free)
            }
        };
        parts.extend(to_host(&local, construct(&local, eps_fine, mode))?);
    }
    Ok(assemble(t, eps_fine, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::validate_partition;
    use crate::rational::ratio;
    use crate::tree::ColorSet;

    fn weighted(parent: Vec<Option<usize>>, w: Vec<Rational>) -> TreeSemilattice {
        let n = parent.len();
        TreeSemilattice::new(parent, vec![ColorSet::EMPTY; n], w, 0).unwrap()
    }

    #[test]
    fn classification_examples() {
        // A leaf of weight 1/10.
        let t = weighted(vec![None, Some(0)], vec![ratio(9, 10), ratio(1, 10)]);
        assert_eq!(classify_vertex(&t, &ratio(1, 2), 1).unwrap(), VertexClass::Light);
        let chain = TreeSemilattice::chain(10);
        assert_eq!(classify_vertex(&chain, &ratio(1, 2), 0).unwrap(), VertexClass::Chaining);
        let star = TreeSemilattice::star(10);
        assert_eq!(classify_vertex(&star, &ratio(3, 10), 0).unwrap(), VertexClass::Singular);
        // Two heavy children and a light root.
        let t = weighted(
            vec![None, Some(0), Some(0)],
            vec![ratio(1, 10), ratio(9, 20), ratio(9, 20)],
        );
        assert_eq!(classify_vertex(&t, &ratio(2, 5), 0).unwrap(), VertexClass::Branching);
    }

    #[test]
    fn chain_of_ten() {
        let t = TreeSemilattice::chain(10);
        let p = eps_partition(&t, &ratio(1, 2)).unwrap();
        assert!(validate_partition(&t, &ratio(1, 2), &p).is_valid());
        // Chaining run 0..4 (total 1/2) merges into one segment cut at the
        // singular vertex 5; the light tail {6..9} is one rooted part.
        assert_eq!(p.len(), 3);
        assert_eq!(p.parts[0].kind, PartType::Segment);
        assert_eq!(p.parts[0].members, vec![0, 1, 2, 3, 4]);
        assert_eq!(p.parts[0].cut, Some(5));
        assert_eq!(p.parts[1].members, vec![5]);
        assert_eq!(p.parts[2].kind, PartType::Rooted);
        assert_eq!(p.parts[2].attach, 6);
    }

    #[test]
    fn star_of_thirty() {
        let t = TreeSemilattice::star(30);
        let eps = ratio(1, 5);
        let p = eps_partition(&t, &eps).unwrap();
        assert!(validate_partition(&t, &eps, &p).is_valid());
        assert_eq!(p.parts[0].members, vec![0]);
        // 6 leaves of weight 1/31 fit under 1/5, 7 do not.
        assert_eq!(p.len(), 6);
        for part in &p.parts[1..] {
            assert_eq!(part.kind, PartType::Forest);
            assert_eq!(part.attach, 0);
            assert_eq!(part.members.len(), 6);
        }
    }

    #[test]
    fn eps_one_and_singleton() {
        let t = TreeSemilattice::star(4);
        let p = eps_partition(&t, &ratio(1, 1)).unwrap();
        assert!(validate_partition(&t, &ratio(1, 1), &p).is_valid());
        assert!(p.len() <= 4);
        let one = TreeSemilattice::chain(1);
        let p = eps_partition(&one, &ratio(1, 2)).unwrap();
        assert_eq!(p.len(), 1);
        let r = refine_partition(&one, &ratio(1, 4), &p).unwrap();
        assert_eq!(r, EpsPartition { epsilon: ratio(1, 4), ..p });
    }

    #[test]
    fn refine_chain() {
        let t = TreeSemilattice::chain(10);
        let coarse = eps_partition(&t, &ratio(1, 2)).unwrap();
        let fine = refine_partition(&t, &ratio(1, 4), &coarse).unwrap();
        assert!(validate_partition(&t, &ratio(1, 4), &fine).is_valid());
        assert!(fine.refines(&coarse));
        assert!(refine_partition(&t, &ratio(1, 2), &coarse).is_err());
    }

    #[test]
    fn bad_epsilon() {
        let t = TreeSemilattice::chain(3);
        assert!(eps_partition(&t, &ratio(0, 1)).is_err());
        assert!(eps_partition(&t, &ratio(3, 2)).is_err());
    }
}
