//! (n,1)-sampling, concentration experiments, and uniformization by chain
//! replacement.
//!
//! Meets are total on tree-semilattices, so the undefined element `⊥` of
//! general samplings never arises and samples stay [`TreeSemilattice`]s.

use num_bigint::BigInt;
use num_traits::Signed;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qf::{stone_pairing_exact_with_budget, QfFormula};
use crate::rational::{ratio, Rational};
use crate::rng::{seeded, MeasureSampler, SeededRng};
use crate::tree::{MeetStructure, NodeId, TreeSemilattice};

/// A sampled structure `T_N`: drawn nodes `Ω` plus their pairwise meets.
#[derive(Debug, Clone)]
pub struct SampledStructure {
    pub tree: TreeSemilattice,
    /// Source node of each sampled node.
    pub origin: Vec<NodeId>,
    /// Whether the node was drawn (in `Ω`) rather than added as a meet.
    pub sampled: Vec<bool>,
    /// Multiplicity among the draws.
    pub counts: Vec<u64>,
    pub draws: usize,
}

impl SampledStructure {
    /// `M`: nodes present only as meets of drawn nodes.
    pub fn meet_only_count(&self) -> usize {
        self.sampled.iter().filter(|s| !**s).count()
    }

    /// Number of distinct drawn nodes.
    pub fn distinct_draws(&self) -> usize {
        self.sampled.iter().filter(|s| **s).count()
    }
}

/// Draws `n` nodes from `t` and closes them under pairwise meets.
pub fn sample_structure(t: &TreeSemilattice, n: usize, seed: u64) -> Result<SampledStructure> {
    let mut rng = seeded(seed, 0);
    sample_with(t, n, &MeasureSampler::new(t), &mut rng)
}

fn sample_with(
    t: &TreeSemilattice,
    n: usize,
    sampler: &MeasureSampler,
    rng: &mut SeededRng,
) -> Result<SampledStructure> {
    if n == 0 {
        return Err(Error::Input("sample size must be at least 1".into()));
    }
    let mut count = vec![0u64; t.len()];
    for _ in 0..n {
        count[sampler.sample(rng)] += 1;
    }
    let mut pos = vec![0; t.len()];
    for (i, &v) in t.preorder().iter().enumerate() {
        pos[v] = i;
    }
    let mut drawn: Vec<NodeId> = (0..t.len()).filter(|&v| count[v] > 0).collect();
    drawn.sort_by_key(|&v| pos[v]);
    // Meets of preorder-consecutive nodes generate all pairwise meets.
    let mut domain = drawn.clone();
    domain.extend(drawn.windows(2).map(|w| t.meet(w[0], w[1])));
    domain.sort_by_key(|&v| pos[v]);
    domain.dedup();

    let mut index = vec![usize::MAX; t.len()];
    for (i, &v) in domain.iter().enumerate() {
        index[v] = i;
    }
    let mut parent = Vec::with_capacity(domain.len());
    let mut stack: Vec<NodeId> = Vec::new();
    for &v in &domain {
        while let Some(&top) = stack.last() {
            if t.leq(top, v) {
                break;
            }
            stack.pop();
        }
        parent.push(stack.last().map(|&u| index[u]));
        stack.push(v);
    }
    let colors = domain.iter().map(|&v| t.color(v)).collect();
    let weights = domain.iter().map(|&v| ratio(count[v] as i64, n as i64)).collect();
    let tree = TreeSemilattice::new(parent, colors, weights, t.k())?;
    Ok(SampledStructure {
        tree,
        sampled: domain.iter().map(|&v| count[v] > 0).collect(),
        counts: domain.iter().map(|&v| count[v]).collect(),
        origin: domain,
        draws: n,
    })
}

/// `2·exp(−(εn−2)²/(p²n))`.
pub fn concentration_bound(eps: f64, n: usize, p: usize) -> f64 {
    let n = n as f64;
    let p = p as f64;
    2.0 * (-(eps * n - 2.0).powi(2) / (p * p * n)).exp()
}

#[derive(Debug, Clone)]
pub struct ConcentrationReport {
    pub exact: Rational,
    /// `|⟨φ,T⟩ − ⟨φ,B⟩|` per trial.
    pub deviations: Vec<Rational>,
    pub exceedances: usize,
    pub rate: f64,
    pub bound: f64,
    /// Three binomial standard deviations at the bound.
    pub slack: f64,
}

impl ConcentrationReport {
    pub fn trials(&self) -> usize {
        self.deviations.len()
    }

    pub fn holds(&self) -> bool {
        self.rate <= self.bound.min(1.0) + self.slack
    }
}

/// Runs `trials` independent `n`-samplings and counts deviations `≥ ε`.
pub fn concentration_experiment(
    t: &TreeSemilattice,
    phi: &QfFormula,
    n: usize,
    trials: usize,
    eps: &Rational,
    seed: u64,
    budget: u128,
) -> Result<ConcentrationReport> {
    if !eps.is_positive() {
        return Err(Error::Input("epsilon must be positive".into()));
    }
    if Rational::from_integer(BigInt::from(n)) * eps <= Rational::from_integer(2.into()) {
        return Err(Error::Input(format!(
            "the concentration bound needs n > 2/ε, got n = {n}, ε = {eps}"
        )));
    }
    if trials == 0 {
        return Err(Error::Input("at least one trial is required".into()));
    }
    let exact = stone_pairing_exact_with_budget(t, phi, budget)?;
    let sampler = MeasureSampler::new(t);
    let deviations = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seeded(seed, trial as u64);
            let s = sample_with(t, n, &sampler, &mut rng)?;
            let value = stone_pairing_exact_with_budget(&s.tree, phi, budget)?;
            Ok((&value - &exact).abs())
        })
        .collect::<Result<Vec<Rational>>>()?;
    let exceedances = deviations.iter().filter(|d| *d >= eps).count();
    let rate = exceedances as f64 / trials as f64;
    let bound = concentration_bound(crate::rational::to_f64(eps), n, phi.arity);
    let b = bound.min(1.0);
    let slack = 3.0 * (b * (1.0 - b) / trials as f64).sqrt();
    Ok(ConcentrationReport { exact, deviations, exceedances, rate, bound, slack })
}

/// `T̂_N`: every drawn node `x` becomes a chain `(x,1) … (x,C·m_x)` with
/// `(x,C·m_x)` nearest the root; meet-only nodes keep one copy `(x,1)`.
#[derive(Debug, Clone)]
pub struct UniformizedStructure {
    pub tree: TreeSemilattice,
    pub chain_length: usize,
    /// `π(x,i) = x`, as an index into the sampled structure.
    pub origin: Vec<NodeId>,
    /// The chain index `i` of each node.
    pub level: Vec<usize>,
}

impl MeetStructure for UniformizedStructure {
    fn node_count(&self) -> usize {
        self.tree.len()
    }

    fn meet(&self, x: NodeId, y: NodeId) -> NodeId {
        self.tree.meet(x, y)
    }

    fn colors(&self, x: NodeId) -> crate::tree::ColorSet {
        self.tree.color(x)
    }
}

pub fn uniformize(s: &SampledStructure, c: usize) -> Result<UniformizedStructure> {
    if c == 0 {
        return Err(Error::Input("chain length must be at least 1".into()));
    }
    let t = &s.tree;
    let copies: Vec<usize> = (0..t.len())
        .map(|x| if s.counts[x] > 0 { c * s.counts[x] as usize } else { 1 })
        .collect();
    let total: usize = copies.iter().sum();
    // Node ids: chains laid out in preorder of the sampled structure, each
    // from (x, len) down to (x, 1).
    let mut first = vec![0; t.len()];
    let mut next = 0;
    for &x in t.preorder() {
        first[x] = next;
        next += copies[x];
    }
    let mut parent = vec![None; total];
    let mut colors = vec![t.color(t.root()); total];
    let mut origin = vec![0; total];
    let mut level = vec![0; total];
    for x in 0..t.len() {
        let len = copies[x];
        for j in 0..len {
            let id = first[x] + j;
            origin[id] = x;
            level[id] = len - j;
            colors[id] = t.color(x);
            parent[id] = if j > 0 {
                Some(id - 1)
            } else {
                // Below (father, 1), the deepest copy of the father.
                t.parent(x).map(|f| first[f] + copies[f] - 1)
            };
        }
    }
    let weights = vec![ratio(1, total as i64); total];
    let tree = TreeSemilattice::new(parent, colors, weights, t.k())?;
    Ok(UniformizedStructure { tree, chain_length: c, origin, level })
}

/// `(p/N)(p + 2M/C)`.
pub fn uniformization_bound(p: usize, draws: usize, meet_only: usize, c: usize) -> Rational {
    let p = p as i64;
    ratio(p, draws as i64) * (Rational::from_integer(p.into()) + ratio(2 * meet_only as i64, c as i64))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    pub lhs: Rational,
    pub rhs: Rational,
    pub bound: Rational,
}

impl BoundCheck {
    pub fn gap(&self) -> Rational {
        (&self.lhs - &self.rhs).abs()
    }

    pub fn holds(&self) -> bool {
        self.gap() <= self.bound
    }
}

/// `⟨φ,T_N⟩`, `⟨φ,T̂_N⟩` and `(p/N)(p + 2M/C)`.
pub fn uniformization_error_check(
    s: &SampledStructure,
    u: &UniformizedStructure,
    phi: &QfFormula,
    budget: u128,
) -> Result<BoundCheck> {
    let lhs = stone_pairing_exact_with_budget(&s.tree, phi, budget)?;
    let rhs = stone_pairing_exact_with_budget(&u.tree, phi, budget)?;
    let bound = uniformization_bound(phi.arity, s.draws, s.meet_only_count(), u.chain_length);
    Ok(BoundCheck { lhs, rhs, bound })
}

/// Whether `φ(v_1..v_p)` in `T̂_N` agrees with `φ(π(v_1)..π(v_p))` in `T_N`.
/// The projections must be pairwise distinct.
pub fn transfer_agrees(
    s: &SampledStructure,
    u: &UniformizedStructure,
    phi: &QfFormula,
    tuple: &[NodeId],
) -> Result<bool> {
    let proj: Vec<NodeId> = tuple
        .iter()
        .map(|&v| u.tree.check_node(v).map(|_| u.origin[v]))
        .collect::<Result<_>>()?;
    for (i, a) in proj.iter().enumerate() {
        if proj[i + 1..].contains(a) {
            return Err(Error::Input(format!("two entries project to node {a}")));
        }
    }
    Ok(phi.eval(&s.tree, &proj)? == phi.eval(&u.tree, tuple)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::validate_axioms;
    use crate::qf::battery::named_formula;
    use crate::qf::parse_formula;
    use crate::rational::int;
    use num_traits::Zero;

    fn star_zero_root(leaves: usize) -> TreeSemilattice {
        let t = TreeSemilattice::star(leaves);
        let mut w = vec![Rational::zero()];
        w.extend(std::iter::repeat_n(ratio(1, leaves as i64), leaves));
        t.with_weights(w).unwrap()
    }

    #[test]
    fn single_draw() {
        let t = TreeSemilattice::chain(5);
        let s = sample_structure(&t, 1, 3).unwrap();
        assert_eq!(s.tree.len(), 1);
        assert_eq!(s.tree.weight(0), &int(1));
    }

    #[test]
    fn chain_samples_are_closed() {
        let t = TreeSemilattice::chain(30);
        for seed in 0..10 {
            let s = sample_structure(&t, 12, seed).unwrap();
            assert_eq!(s.meet_only_count(), 0);
            let total: u64 = s.counts.iter().sum();
            assert_eq!(total, 12);
        }
    }

    #[test]
    fn two_leaves_add_root() {
        let t = star_zero_root(50);
        let s = (0..)
            .map(|seed| sample_structure(&t, 2, seed).unwrap())
            .find(|s| s.distinct_draws() == 2)
            .unwrap();
        assert_eq!(s.tree.len(), 3);
        assert_eq!(s.meet_only_count(), 1);
        assert_eq!(s.origin[0], 0);
        assert!(s.tree.weight(0).is_zero());
    }

    #[test]
    fn pairwise_meets_suffice() {
        let trees = crate::corpus::corpus(5, 30, 40, 2);
        for (i, t) in trees.iter().enumerate() {
            let s = sample_structure(t, 8, i as u64).unwrap();
            assert!(validate_axioms(&s.tree).holds());
            let set: std::collections::BTreeSet<NodeId> = s.origin.iter().copied().collect();
            for &a in &s.origin {
                for &b in &s.origin {
                    for &c in &s.origin {
                        assert!(set.contains(&t.meet(t.meet(a, b), c)));
                    }
                }
            }
        }
    }

    #[test]
    fn deterministic() {
        let t = TreeSemilattice::star(9);
        let a = sample_structure(&t, 20, 7).unwrap();
        let b = sample_structure(&t, 20, 7).unwrap();
        assert_eq!(a.origin, b.origin);
        assert_eq!(a.counts, b.counts);
    }

    #[test]
    fn concentration_tautology_and_bounds() {
        let t = TreeSemilattice::star(3);
        let taut = QfFormula::tautology();
        let r = concentration_experiment(&t, &taut, 50, 40, &ratio(1, 10), 1, 1 << 20).unwrap();
        assert_eq!(r.exceedances, 0);
        assert!(r.deviations.iter().all(|d| d.is_zero()));
        assert!(concentration_experiment(&t, &taut, 20, 10, &ratio(1, 10), 1, 1 << 20).is_err());

        let fig2 = named_formula("fig2").unwrap();
        let r = concentration_experiment(&t, &fig2, 200, 100, &ratio(1, 10), 2, 1 << 20).unwrap();
        assert_eq!(r.exact, ratio(3, 8));
        assert!(r.holds());
        let big = concentration_experiment(&t, &fig2, 10_000, 20, &ratio(1, 10), 3, 1 << 20).unwrap();
        assert_eq!(big.exceedances, 0);
        assert!(big.bound < 1e-4);
    }

    #[test]
    fn uniformize_single_node_chain() {
        let t = TreeSemilattice::chain(1);
        let s = sample_structure(&t, 1, 0).unwrap();
        let u = uniformize(&s, 3).unwrap();
        assert_eq!(u.tree.len(), 3);
        // (x,3) ≤ (x,2) ≤ (x,1).
        let at = |i| (0..3).find(|&v| u.level[v] == i).unwrap();
        assert!(u.tree.leq(at(3), at(2)) && u.tree.leq(at(2), at(1)));
        assert_eq!(u.tree.meet(at(1), at(2)), at(2));
    }

    #[test]
    fn uniformize_star_sample() {
        let t = star_zero_root(100);
        let s = (0..)
            .map(|seed| sample_structure(&t, 2, seed).unwrap())
            .find(|s| s.distinct_draws() == 2)
            .unwrap();
        let u = uniformize(&s, 2).unwrap();
        assert_eq!(u.tree.len(), 5);
        assert!(u.tree.weights().iter().all(|w| *w == ratio(1, 5)));
        assert!(validate_axioms(&u.tree).holds());
    }

    #[test]
    fn meet_rule_matches_cases() {
        let trees = crate::corpus::corpus(8, 10, 25, 2);
        for (i, t) in trees.iter().enumerate() {
            let s = sample_structure(t, 6, i as u64).unwrap();
            for c in [1, 2, 3] {
                let u = uniformize(&s, c).unwrap();
                assert!(validate_axioms(&u.tree).holds());
                for a in 0..u.tree.len() {
                    for b in 0..u.tree.len() {
                        let (x, y) = (u.origin[a], u.origin[b]);
                        let m = s.tree.meet(x, y);
                        let expect = if x == y {
                            (x, u.level[a].max(u.level[b]))
                        } else if m == x {
                            (x, u.level[a])
                        } else if m == y {
                            (y, u.level[b])
                        } else {
                            (m, 1)
                        };
                        let z = u.tree.meet(a, b);
                        assert_eq!((u.origin[z], u.level[z]), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn uniformization_bound_and_transfer() {
        let t = star_zero_root(1000);
        let s = (0..)
            .map(|seed| sample_structure(&t, 20, seed).unwrap())
            .find(|s| s.distinct_draws() == 20)
            .unwrap();
        let phi = parse_formula("x1 ^ x2 = x1", 2, 0).unwrap();
        for c in [1, 5, 25] {
            let u = uniformize(&s, c).unwrap();
            let check = uniformization_error_check(&s, &u, &phi, 1 << 24).unwrap();
            assert!(check.holds(), "C = {c}: {check:?}");
            for a in (0..u.tree.len()).step_by(3) {
                for b in (0..u.tree.len()).step_by(7) {
                    if u.origin[a] != u.origin[b] {
                        assert!(transfer_agrees(&s, &u, &phi, &[a, b]).unwrap());
                    }
                }
            }
        }
    }
}
