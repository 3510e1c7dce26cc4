//! Standard reductions `π: T → T̂` along an ε-partition, their checks, and
//! towers of reductions along successive refinements.

mod standard;
mod tower;
mod verify;

pub use standard::{standard_reduction, ReductionMap, Role};
pub use tower::{build_tower, verify_tower, ReductionTower};
pub use verify::{
    projected_substructure_isomorphism, reduction_error_check, size_bound, verify_reduction,
    ErrorCheck, ReductionReport, ReductionViolation,
};
