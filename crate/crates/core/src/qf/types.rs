//! Distributions of marked generated substructures ("types") and the
//! QF distance computed from them.
//!
//! The satisfaction of a QF_p formula by `(v_1, ..., v_p)` only depends on
//! the isomorphism type of `T<v_1, ..., v_p>` with its marks, and every
//! union of types is QF-definable. Hence
//! `sup_{φ ∈ QF_p} |⟨φ,T1⟩ - ⟨φ,T2⟩|` is the total-variation distance of
//! the two type distributions.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::qf::QfFormula;
use crate::rational::{pow2_inv, Rational, WeightSum};
use crate::substructure::{type_encoding, MarkedTree};
use crate::tree::TreeSemilattice;
use crate::tuples::{TupleSpace, DEFAULT_BUDGET};

/// Probability of each type, stored as integer masses over one
/// denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDistribution {
    pub arity: usize,
    denom: BigUint,
    masses: BTreeMap<String, BigUint>,
}

impl TypeDistribution {
    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn denom(&self) -> &BigUint {
        &self.denom
    }

    /// Unnormalized mass of a type (zero if absent).
    pub fn mass(&self, key: &str) -> BigUint {
        self.masses.get(key).cloned().unwrap_or_default()
    }

    pub fn probability(&self, key: &str) -> Rational {
        Rational::new(BigInt::from(self.mass(key)), BigInt::from(self.denom.clone()))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.masses.keys().map(String::as_str)
    }

    /// `(encoding, probability)` in encoding order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, Rational)> + '_ {
        self.masses.iter().map(|(k, m)| {
            (k.as_str(), Rational::new(BigInt::from(m.clone()), BigInt::from(self.denom.clone())))
        })
    }

    /// Pairing of `φ` recomputed from the types alone.
    pub fn pairing(&self, phi: &QfFormula) -> Result<Rational> {
        if phi.arity != self.arity {
            return Err(Error::Arity { expected: self.arity, got: phi.arity });
        }
        let mut sum = BigUint::zero();
        for (key, mass) in &self.masses {
            let ty = MarkedTree::decode(key)?;
            if phi.body.holds(&ty, &ty.marks) {
                sum += mass;
            }
        }
        Ok(Rational::new(BigInt::from(sum), BigInt::from(self.denom.clone())))
    }
}

pub fn type_distribution(t: &TreeSemilattice, p: usize) -> Result<TypeDistribution> {
    type_distribution_with_budget(t, p, DEFAULT_BUDGET)
}

pub fn type_distribution_with_budget(
    t: &TreeSemilattice,
    p: usize,
    budget: u128,
) -> Result<TypeDistribution> {
    let space = TupleSpace::new(t, p, budget)?;
    let sums = space.fold(
        HashMap::<String, WeightSum>::new,
        |acc, tuple, w| w.add_to(acc.entry(type_encoding(t, tuple)).or_default()),
        |a, b| {
            for (k, v) in b {
                a.entry(k).or_default().merge(&v);
            }
        },
    );
    let masses = sums.into_iter().map(|(k, v)| (k, v.total())).collect();
    Ok(TypeDistribution { arity: p, denom: space.denom(), masses })
}

/// `(1/2) Σ |P1(τ) - P2(τ)|`.
pub fn total_variation(a: &TypeDistribution, b: &TypeDistribution) -> Result<Rational> {
    if a.arity != b.arity {
        return Err(Error::Arity { expected: a.arity, got: b.arity });
    }
    let da = BigInt::from(a.denom.clone());
    let db = BigInt::from(b.denom.clone());
    let mut acc = BigInt::zero();
    let mut visit = |ma: BigUint, mb: BigUint| {
        acc += (BigInt::from(ma) * &db - BigInt::from(mb) * &da).abs();
    };
    for (k, ma) in &a.masses {
        visit(ma.clone(), b.mass(k));
    }
    for (k, mb) in &b.masses {
        if !a.masses.contains_key(k) {
            visit(BigUint::zero(), mb.clone());
        }
    }
    Ok(Rational::new(acc, da * db * 2))
}

/// `sup_{φ ∈ QF_p} |⟨φ,T1⟩ - ⟨φ,T2⟩|`, as the total variation of types.
pub fn qf_sup_distance_p(t1: &TreeSemilattice, t2: &TreeSemilattice, p: usize) -> Result<Rational> {
    qf_sup_distance_p_with_budget(t1, t2, p, DEFAULT_BUDGET)
}

pub fn qf_sup_distance_p_with_budget(
    t1: &TreeSemilattice,
    t2: &TreeSemilattice,
    p: usize,
    budget: u128,
) -> Result<Rational> {
    total_variation(
        &type_distribution_with_budget(t1, p, budget)?,
        &type_distribution_with_budget(t2, p, budget)?,
    )
}

/// Bracket `[lo, hi]` for `dist(T1, T2)` from the first `P` terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistInterval {
    pub lo: Rational,
    pub hi: Rational,
    /// `sup_p` for `p = 1..=completed`.
    pub per_arity: Vec<Rational>,
    /// Largest arity that fit the budget; equals the requested `P` unless
    /// the budget ran out.
    pub completed: usize,
}

pub fn dist_truncated(
    t1: &TreeSemilattice,
    t2: &TreeSemilattice,
    max_p: usize,
    budget: u128,
) -> Result<DistInterval> {
    if max_p == 0 {
        return Err(Error::Input("P must be at least 1".into()));
    }
    let mut per_arity = Vec::new();
    let mut lo = Rational::zero();
    for p in 1..=max_p {
        match qf_sup_distance_p_with_budget(t1, t2, p, budget) {
            Ok(d) => {
                lo += &d * pow2_inv(p);
                per_arity.push(d);
            }
            Err(Error::Budget { .. }) if p > 1 => break,
            Err(e) => return Err(e),
        }
    }
    let completed = per_arity.len();
    let hi = &lo + pow2_inv(completed);
    Ok(DistInterval { lo, hi, per_arity, completed })
}
