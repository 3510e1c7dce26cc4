//! Quantifier-free formulas, Stone pairings and type distributions.

pub mod battery;
mod formula;
pub mod pairing;
pub mod types;

pub use formula::{infer_arity, parse_formula, Formula, QfFormula, Term};
pub(crate) use formula::{Dialect, Parser};
pub use pairing::{stone_pairing_exact, stone_pairing_exact_with_budget, stone_pairing_mc, McEstimate};
pub use types::{
    dist_truncated, qf_sup_distance_p, qf_sup_distance_p_with_budget, total_variation,
    type_distribution, type_distribution_with_budget, DistInterval, TypeDistribution,
};
