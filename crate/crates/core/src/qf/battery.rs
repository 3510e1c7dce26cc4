//! Exhaustive formula batteries.
//!
//! Terms are taken up to associativity, commutativity and idempotence of
//! the meet: one canonical term per nonempty variable subset, written as a
//! left-nested meet of its variables in increasing order (so a subset of
//! size `s` has term depth `s`). Atoms are equalities between distinct
//! canonical terms, the tautology `x1 = x1`, and color atoms on every
//! canonical term. Formulas of depth `d + 1` are negations of depth-`d`
//! formulas and conjunctions/disjunctions of ordered pairs whose deeper
//! operand has depth `d`.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::qf::types::TypeDistribution;
use crate::qf::{Formula, QfFormula, Term};
use crate::rational::Rational;
use crate::substructure::MarkedTree;

fn subset_term(mask: u32) -> Term {
    let mut vars = (0..32).filter(|i| mask >> i & 1 == 1).map(|i| Term::var(i + 1));
    let first = vars.next().expect("nonempty subset");
    vars.fold(first, Term::meet)
}

/// Atoms of the battery with their depths, in a fixed order.
pub fn atoms(arity: usize, k: usize) -> Vec<Formula> {
    assert!((1..=16).contains(&arity), "battery arity out of range");
    let masks: Vec<u32> = {
        let mut m: Vec<u32> = (1..1u32 << arity).collect();
        m.sort_by_key(|&x| (x.count_ones(), x));
        m
    };
    let mut out = vec![Formula::Eq(Term::var(1), Term::var(1))];
    for (i, &a) in masks.iter().enumerate() {
        for &b in &masks[i + 1..] {
            out.push(Formula::Eq(subset_term(a), subset_term(b)));
        }
    }
    for &a in &masks {
        for c in 1..=k {
            out.push(Formula::Color(c, subset_term(a)));
        }
    }
    out.sort_by_key(Formula::depth);
    out
}

/// Every battery formula of the given arity with depth `<= max_depth`.
pub fn enumerate_formulas(arity: usize, max_depth: usize, k: usize) -> Vec<QfFormula> {
    let atoms = atoms(arity, k);
    // by_depth[d]: formulas of depth exactly d.
    let mut by_depth: Vec<Vec<Formula>> = vec![Vec::new(); max_depth + 1];
    for a in atoms {
        let d = a.depth();
        if d <= max_depth {
            by_depth[d].push(a);
        }
    }
    for d in 2..max_depth {
        let mut next = Vec::new();
        for f in &by_depth[d] {
            next.push(Formula::not(f.clone()));
        }
        let lower: Vec<&Formula> = by_depth[..=d].iter().flatten().collect();
        for a in &lower {
            for b in &lower {
                if a.depth() == d || b.depth() == d {
                    next.push(Formula::and((*a).clone(), (*b).clone()));
                    next.push(Formula::or((*a).clone(), (*b).clone()));
                }
            }
        }
        by_depth[d + 1].extend(next);
    }
    by_depth.into_iter().flatten().map(|body| QfFormula { arity, body }).collect()
}

/// A formula paired with its truth vector over a fixed list of types.
#[derive(Debug, Clone)]
pub struct FormulaClass {
    pub formula: QfFormula,
    pub truth: Vec<u64>,
}

impl FormulaClass {
    pub fn holds_at(&self, i: usize) -> bool {
        self.truth[i / 64] >> (i % 64) & 1 == 1
    }
}

/// Battery formulas up to equivalence on `points`: one representative of
/// minimal depth per distinct truth vector. A pairing on a structure whose
/// types all lie in `points` only depends on the class, so a sweep over the
/// classes is a sweep over the whole battery.
pub fn formula_classes(
    arity: usize,
    max_depth: usize,
    k: usize,
    points: &[MarkedTree],
) -> Vec<FormulaClass> {
    let words = points.len().div_ceil(64).max(1);
    let tail_mask = if points.len().is_multiple_of(64) && !points.is_empty() {
        u64::MAX
    } else {
        (1u64 << (points.len() % 64)) - 1
    };
    let truth_of = |f: &Formula| {
        let mut t = vec![0u64; words];
        for (i, p) in points.iter().enumerate() {
            if f.holds(p, &p.marks) {
                t[i / 64] |= 1 << (i % 64);
            }
        }
        t
    };
    let mut classes: Vec<FormulaClass> = Vec::new();
    let mut depth_of: Vec<usize> = Vec::new();
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut push = |classes: &mut Vec<FormulaClass>, depth_of: &mut Vec<usize>, body: Formula, truth: Vec<u64>, d: usize| {
        if !seen.contains_key(&truth) {
            seen.insert(truth.clone(), classes.len());
            classes.push(FormulaClass { formula: QfFormula { arity, body }, truth });
            depth_of.push(d);
        }
    };
    let atoms = atoms(arity, k);
    for d in 1..=max_depth {
        for a in atoms.iter().filter(|a| a.depth() == d) {
            let t = truth_of(a);
            push(&mut classes, &mut depth_of, a.clone(), t, d);
        }
        if d < 2 {
            continue;
        }
        let prev: Vec<usize> = (0..classes.len()).filter(|&i| depth_of[i] == d - 1).collect();
        let lower: Vec<usize> = (0..classes.len()).filter(|&i| depth_of[i] < d).collect();
        let mut fresh: Vec<(Formula, Vec<u64>)> = Vec::new();
        for &i in &prev {
            let mut t: Vec<u64> = classes[i].truth.iter().map(|w| !w).collect();
            *t.last_mut().unwrap() &= tail_mask;
            fresh.push((Formula::not(classes[i].formula.body.clone()), t));
        }
        for &i in &lower {
            for &j in &lower {
                if depth_of[i] != d - 1 && depth_of[j] != d - 1 {
                    continue;
                }
                let (a, b) = (&classes[i], &classes[j]);
                let and: Vec<u64> = a.truth.iter().zip(&b.truth).map(|(x, y)| x & y).collect();
                let or: Vec<u64> = a.truth.iter().zip(&b.truth).map(|(x, y)| x | y).collect();
                fresh.push((Formula::and(a.formula.body.clone(), b.formula.body.clone()), and));
                fresh.push((Formula::or(a.formula.body.clone(), b.formula.body.clone()), or));
            }
        }
        for (body, t) in fresh {
            push(&mut classes, &mut depth_of, body, t, d);
        }
    }
    classes
}

/// Several type distributions of one arity laid out over a shared list of
/// types, so that pairings of formula classes are sums of masses.
#[derive(Debug, Clone)]
pub struct TypeTable {
    pub arity: usize,
    pub keys: Vec<String>,
    pub points: Vec<MarkedTree>,
    masses: Vec<Vec<BigUint>>,
    denoms: Vec<BigUint>,
}

impl TypeTable {
    pub fn new(dists: &[&TypeDistribution]) -> Result<Self> {
        let arity = dists.first().map_or(1, |d| d.arity);
        if let Some(d) = dists.iter().find(|d| d.arity != arity) {
            return Err(Error::Arity { expected: arity, got: d.arity });
        }
        let mut keys: Vec<String> = dists.iter().flat_map(|d| d.keys().map(String::from)).collect();
        keys.sort();
        keys.dedup();
        let points = keys.iter().map(|k| MarkedTree::decode(k)).collect::<Result<_>>()?;
        let masses = dists.iter().map(|d| keys.iter().map(|k| d.mass(k)).collect()).collect();
        let denoms = dists.iter().map(|d| d.denom().clone()).collect();
        Ok(TypeTable { arity, keys, points, masses, denoms })
    }

    /// Pairing of a class with distribution `which`.
    pub fn pairing(&self, which: usize, class: &FormulaClass) -> Rational {
        let mut sum = BigUint::zero();
        for (i, m) in self.masses[which].iter().enumerate() {
            if class.holds_at(i) {
                sum += m;
            }
        }
        Rational::new(BigInt::from(sum), BigInt::from(self.denoms[which].clone()))
    }
}

/// Conjunction of literals describing a type completely: for every pair
/// of canonical terms whether they are equal, and for every term and color
/// whether the color holds. Exactly the tuples of that type satisfy it.
pub fn characteristic_formula(ty: &MarkedTree, k: usize) -> QfFormula {
    let arity = ty.arity();
    let eval = |mask: u32| subset_term(mask).eval(ty, &ty.marks);
    let masks: Vec<u32> = (1..1u32 << arity).collect();
    let mut lits = Vec::new();
    for (i, &a) in masks.iter().enumerate() {
        for &b in &masks[i + 1..] {
            let eq = Formula::Eq(subset_term(a), subset_term(b));
            lits.push(if eval(a) == eval(b) { eq } else { Formula::not(eq) });
        }
        for c in 1..=k {
            let at = Formula::Color(c, subset_term(a));
            lits.push(if crate::tree::MeetStructure::colors(ty, eval(a)).contains(c) {
                at
            } else {
                Formula::not(at)
            });
        }
    }
    let body = lits
        .into_iter()
        .reduce(Formula::and)
        .unwrap_or_else(|| Formula::Eq(Term::var(1), Term::var(1)));
    QfFormula { arity, body }
}

/// Disjunction of characteristic formulas; an empty set gives `!(x1 = x1)`.
pub fn union_formula(types: &[MarkedTree], arity: usize, k: usize) -> QfFormula {
    let body = types
        .iter()
        .map(|t| characteristic_formula(t, k).body)
        .reduce(Formula::or)
        .unwrap_or_else(|| Formula::not(Formula::Eq(Term::var(1), Term::var(1))));
    QfFormula { arity, body }
}

/// Formulas available by name on the command line.
pub fn named_formula(name: &str) -> Option<QfFormula> {
    match name {
        "fig2" | "incomparable" => Some(QfFormula::incomparable_pair()),
        "taut" | "true" => Some(QfFormula::tautology()),
        _ => None,
    }
}
