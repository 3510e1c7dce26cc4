//! Finite weighted colored tree-semilattices and the machinery around them:
//! quantifier-free Stone pairings, type distributions, ε-partitions,
//! standard reductions and reduction towers, sampling and uniformization,
//! and m-partite cograph interpretations.
//!
//! All measures are exact rationals. Every operation that enumerates
//! tuples takes an explicit budget and refuses rather than approximating.

pub mod axioms;
pub mod cograph;
pub mod corpus;
pub mod error;
pub mod format;
pub mod partition;
pub mod qf;
pub mod rational;
pub mod reduction;
pub mod rng;
pub mod sampling;
pub mod substructure;
pub mod tree;
pub mod tuples;

pub use error::{Error, Result};
pub use qf::{parse_formula, Formula, QfFormula, Term};
pub use rational::Rational;
pub use tree::{color_compare, ColorSet, MeetStructure, NodeId, TreeSemilattice};
pub use partition::{EpsPartition, Part, PartType};
pub use reduction::{ReductionMap, ReductionTower};
pub use sampling::{SampledStructure, UniformizedStructure};
pub use cograph::{Cotree, SimpleGraph};
