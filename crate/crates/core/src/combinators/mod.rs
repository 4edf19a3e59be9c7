//! Domain combinators: Cartesian and reduced products, and the cardinal power.

mod counters;
mod power;
mod product;
mod reduction;

pub use counters::{instrument, Counted, OpCounts, OpKind};
pub use power::{power_abstract, power_pointwise, PowerValue};
pub use product::{cartesian_apply, pair_gamma, Applied, PairValue};
pub use reduction::{
    diff_to_intervals, reduce_counting, reduce_fixpoint, reduce_sequential, rho_intervals_to_diff,
    IntervalCongruence, IntervalParity, ReductionRule, DEFAULT_REDUCTION_CAP,
};
