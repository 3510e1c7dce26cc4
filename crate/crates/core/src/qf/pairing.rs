//! Stone pairings `⟨φ, (T, μ)⟩ = μ^{⊗p}(φ(T))`.

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::qf::QfFormula;
use crate::rational::{Rational, WeightSum};
use crate::rng::{seeded, MeasureSampler};
use crate::tree::TreeSemilattice;
use crate::tuples::{TupleSpace, DEFAULT_BUDGET};

fn check_colors(t: &TreeSemilattice, phi: &QfFormula) -> Result<()> {
    if phi.body.max_color() > t.k() {
        return Err(Error::Input(format!(
            "formula uses M{} but the structure has k = {}",
            phi.body.max_color(),
            t.k()
        )));
    }
    Ok(())
}

/// Exact pairing with the default tuple budget.
pub fn stone_pairing_exact(t: &TreeSemilattice, phi: &QfFormula) -> Result<Rational> {
    stone_pairing_exact_with_budget(t, phi, DEFAULT_BUDGET)
}

pub fn stone_pairing_exact_with_budget(
    t: &TreeSemilattice,
    phi: &QfFormula,
    budget: u128,
) -> Result<Rational> {
    check_colors(t, phi)?;
    let space = TupleSpace::new(t, phi.arity, budget).map_err(|e| match e {
        Error::Budget { needed, budget } => Error::Input(format!(
            "exact pairing needs {needed} tuples, budget is {budget}; use the Monte-Carlo pairing"
        )),
        e => e,
    })?;
    let sum = space.fold(
        WeightSum::default,
        |acc, tuple, w| {
            if phi.body.holds(t, tuple) {
                w.add_to(acc);
            }
        },
        |a, b| a.merge(&b),
    );
    Ok(sum.over(&space.denom()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    /// Binomial standard error `sqrt(q(1-q)/samples)`.
    pub stderr: f64,
    pub samples: u64,
    pub hits: u64,
}

/// Monte-Carlo pairing over `samples` i.i.d. μ-distributed tuples.
pub fn stone_pairing_mc(
    t: &TreeSemilattice,
    phi: &QfFormula,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::Input("samples must be at least 1".into()));
    }
    check_colors(t, phi)?;
    let sampler = MeasureSampler::new(t);
    let mut rng = seeded(seed, 0);
    let mut tuple = vec![0; phi.arity];
    let mut hits = 0u64;
    for _ in 0..samples {
        for slot in tuple.iter_mut() {
            *slot = sampler.sample(&mut rng);
        }
        if phi.body.holds(t, &tuple) {
            hits += 1;
        }
    }
    let q = hits as f64 / samples as f64;
    let stderr = (q * (1.0 - q) / samples as f64).sqrt();
    Ok(McEstimate { estimate: q, stderr, samples, hits })
}

/// `⟨φ⟩` as an `f64`, for reporting.
pub fn pairing_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
