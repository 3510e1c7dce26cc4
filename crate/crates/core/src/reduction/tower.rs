//! Towers `T̂_1 ← T̂_2 ← …` of standard reductions along successive
//! refinements, with the connecting maps `p_i` checked against
//! `π_i = p_i∘π_{i+1}`.

use crate::error::{Error, Result};
use crate::partition::{eps_partition, infer_partition, refine_partition, PartType};
use crate::rational::Rational;
use crate::reduction::{standard_reduction, verify_reduction, ReductionMap};
use crate::tree::{NodeId, TreeSemilattice};

#[derive(Debug, Clone)]
pub struct ReductionTower {
    /// Level `i`: the standard reduction of the source along `𝒫_i`.
    pub levels: Vec<ReductionMap>,
    /// `connecting[i] = p_i: T̂_{i+1} → T̂_i`.
    pub connecting: Vec<Vec<NodeId>>,
}

impl ReductionTower {
    pub fn epsilons(&self) -> Vec<Rational> {
        self.levels.iter().map(|r| r.epsilon.clone()).collect()
    }

    /// Nodes `x` of the source with `π_i(x) ≠ p_i(π_{i+1}(x))`.
    pub fn commutation_failures(&self, i: usize) -> Vec<NodeId> {
        let (coarse, fine, p) = (&self.levels[i], &self.levels[i + 1], &self.connecting[i]);
        (0..coarse.pi.len()).filter(|&x| coarse.pi[x] != p[fine.pi[x]]).collect()
    }
}

/// Builds the tower for a strictly decreasing list of epsilons in `(0, 1]`.
pub fn build_tower(t: &TreeSemilattice, epsilons: &[Rational]) -> Result<ReductionTower> {
    if epsilons.is_empty() {
        return Err(Error::Input("at least one epsilon is required".into()));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Input("epsilons must be strictly decreasing".into()));
    }
    let mut partition = eps_partition(t, &epsilons[0])?;
    let mut levels = vec![standard_reduction(t, &partition)?];
    for eps in &epsilons[1..] {
        partition = refine_partition(t, eps, &partition)?;
        levels.push(standard_reduction(t, &partition)?);
    }
    let mut connecting = Vec::with_capacity(levels.len() - 1);
    for i in 0..levels.len() - 1 {
        connecting.push(connecting_map(&levels[i], &levels[i + 1])?);
    }
    let tower = ReductionTower { levels, connecting };
    for i in 0..tower.connecting.len() {
        if let Some(&x) = tower.commutation_failures(i).first() {
            return Err(Error::Invariant(format!(
                "tower does not commute at level {i}, source node {x}"
            )));
        }
    }
    Ok(tower)
}

/// `p_i`: the standard reduction of `T̂_{i+1}` along the coarse partition
/// pulled back through `f̂_{i+1}`, identified with `T̂_i` by part and role.
fn connecting_map(coarse: &ReductionMap, fine: &ReductionMap) -> Result<Vec<NodeId>> {
    let th = &fine.target;
    // Coarse part of each fine part.
    let mut up = vec![usize::MAX; fine.partition.len()];
    for x in 0..fine.source.len() {
        up[fine.partition.part_of[x]] = coarse.partition.part_of[x];
    }
    let labels: Vec<usize> = fine.target_part.iter().map(|&j| up[j]).collect();
    let hints: Vec<PartType> = coarse.target_partition.parts.iter().map(|p| p.kind).collect();
    let h = infer_partition(th, &coarse.epsilon, &labels, Some(&hints))?;
    let step = standard_reduction(th, &h)
        .map_err(|e| Error::Invariant(format!("coarse labels on the finer reduction: {e}")))?;

    let mut iso = vec![usize::MAX; step.target.len()];
    for (z, &(part, role)) in step.roles.iter().enumerate() {
        iso[z] = match coarse.node_of(part, role) {
            Some(y) => y,
            None => single_node_match(coarse, &step, part).ok_or_else(|| {
                Error::Invariant(format!("no counterpart for role {role:?} of part {part}"))
            })?,
        };
    }
    let mut seen = vec![false; coarse.target.len()];
    for &y in &iso {
        if std::mem::replace(&mut seen[y], true) {
            return Err(Error::Invariant("connecting map is not injective on roles".into()));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Invariant("connecting map misses target nodes".into()));
    }
    for z in 0..step.target.len() {
        let y = iso[z];
        let same_parent = step.target.parent(z).map(|q| iso[q]) == coarse.target.parent(y);
        if !same_parent
            || step.target.color(z) != coarse.target.color(y)
            || step.target.weight(z) != coarse.target.weight(y)
        {
            return Err(Error::Invariant(format!(
                "reduced finer level differs from the coarser level at node {y}"
            )));
        }
    }
    Ok(step.pi.iter().map(|&z| iso[z]).collect())
}

fn single_node_match(coarse: &ReductionMap, step: &ReductionMap, part: usize) -> Option<NodeId> {
    let mut a = (0..coarse.target.len()).filter(|&y| coarse.target_part[y] == part);
    let mut b = (0..step.target.len()).filter(|&z| step.target_part[z] == part);
    match (a.next(), a.next(), b.next(), b.next()) {
        (Some(y), None, Some(_), None) => Some(y),
        _ => None,
    }
}

/// The standard reductions at every level pass [`verify_reduction`].
pub fn verify_tower(tower: &ReductionTower) -> bool {
    tower.levels.iter().all(|r| verify_reduction(r).is_valid())
        && (0..tower.connecting.len()).all(|i| tower.commutation_failures(i).is_empty())
}
