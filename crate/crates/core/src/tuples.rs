//! Exact enumeration of weighted `p`-tuples.
//!
//! Only tuples over the support of the measure are visited (zero-weight
//! tuples contribute nothing to any pairing), and the budget is counted on
//! `|support|^p`. Work is split on the first coordinate and recombined in
//! index order, so results do not depend on scheduling.

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rational::{ScaledMeasure, WeightSum};
use crate::tree::{NodeId, TreeSemilattice};

/// Default cap on the number of enumerated tuples.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Weight of one tuple as a numerator over [`TupleSpace::denom`].
#[derive(Debug, Clone, Copy)]
pub enum TupleWeight<'a> {
    Small(u128),
    Big(&'a BigUint),
}

impl TupleWeight<'_> {
    pub fn add_to(self, sum: &mut WeightSum) {
        match self {
            TupleWeight::Small(w) => sum.add_small(w),
            TupleWeight::Big(w) => sum.add_big(w),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TupleSpace {
    support: Vec<NodeId>,
    measure: ScaledMeasure,
    p: usize,
}

pub fn tuple_count(n: usize, p: usize) -> u128 {
    (n as u128).checked_pow(p as u32).unwrap_or(u128::MAX)
}

impl TupleSpace {
    pub fn new(t: &TreeSemilattice, p: usize, budget: u128) -> Result<Self> {
        if p == 0 {
            return Err(Error::Input("arity must be at least 1".into()));
        }
        let support = t.support();
        let needed = tuple_count(support.len(), p);
        if needed > budget {
            return Err(Error::Budget { needed, budget });
        }
        let weights: Vec<_> = support.iter().map(|&v| t.weight(v).clone()).collect();
        Ok(TupleSpace { measure: ScaledMeasure::new(&weights), support, p })
    }

    pub fn arity(&self) -> usize {
        self.p
    }

    /// Common denominator of all tuple weights.
    pub fn denom(&self) -> BigUint {
        self.measure.denom_pow(self.p)
    }

    /// Folds over all tuples in parallel. `visit` sees each tuple with its
    /// weight; per-worker accumulators are merged in first-coordinate order.
    pub fn fold<A, I, V, M>(&self, init: I, visit: V, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync,
        V: Fn(&mut A, &[NodeId], TupleWeight<'_>) + Sync,
        M: Fn(&mut A, A),
    {
        let parts: Vec<A> = (0..self.support.len())
            .into_par_iter()
            .map(|first| {
                let mut acc = init();
                self.visit_from(first, &mut |tuple, w| visit(&mut acc, tuple, w));
                acc
            })
            .collect();
        let mut out = init();
        for part in parts {
            merge(&mut out, part);
        }
        out
    }

    /// Sequential visit of every tuple, in lexicographic support order.
    pub fn for_each(&self, mut visit: impl FnMut(&[NodeId], TupleWeight<'_>)) {
        for first in 0..self.support.len() {
            self.visit_from(first, &mut visit);
        }
    }

    fn visit_from(&self, first: usize, visit: &mut dyn FnMut(&[NodeId], TupleWeight<'_>)) {
        let p = self.p;
        let n = self.support.len();
        let mut idx = vec![0usize; p];
        idx[0] = first;
        let mut tuple: Vec<NodeId> = vec![self.support[first]; p];
        if self.measure.fits_small(p) {
            let nums = self.measure.small_nums().expect("small numerators");
            let mut prod = vec![0u128; p];
            prod[0] = nums[first] as u128;
            for level in 1..p {
                prod[level] = prod[level - 1] * nums[0] as u128;
                tuple[level] = self.support[0];
            }
            loop {
                visit(&tuple, TupleWeight::Small(prod[p - 1]));
                // Odometer increment on positions 1..p.
                let mut level = p - 1;
                loop {
                    if level == 0 {
                        return;
                    }
                    idx[level] += 1;
                    if idx[level] < n {
                        break;
                    }
                    idx[level] = 0;
                    level -= 1;
                }
                for l in level..p {
                    prod[l] = prod[l - 1] * nums[idx[l]] as u128;
                    tuple[l] = self.support[idx[l]];
                }
            }
        } else {
            let nums = &self.measure.nums;
            let mut prod: Vec<BigUint> = vec![BigUint::default(); p];
            prod[0] = nums[first].clone();
            for level in 1..p {
                prod[level] = &prod[level - 1] * &nums[0];
                tuple[level] = self.support[0];
            }
            loop {
                visit(&tuple, TupleWeight::Big(&prod[p - 1]));
                let mut level = p - 1;
                loop {
                    if level == 0 {
                        return;
                    }
                    idx[level] += 1;
                    if idx[level] < n {
                        break;
                    }
                    idx[level] = 0;
                    level -= 1;
                }
                for l in level..p {
                    prod[l] = &prod[l - 1] * &nums[idx[l]];
                    tuple[l] = self.support[idx[l]];
                }
            }
        }
    }
}
