//! Two-level square grids over the unit square and the quantities built on them.
//!
//! Coarse squares of side `t = 1/W` carry the density events; fine squares of
//! side `a = t/L` carry isolation, the gap sum `Y_α` and the constructive tree
//! `T_uni`. Both `W` and `L` are odd.

mod occupancy;
mod plan;
mod tuni;

pub use occupancy::{gap_sum, gap_sum_of, independence_families, occupancy, OccupancyReport};
pub use plan::{plan_tiling, TilingPlan};
pub use tuni::{build_tuni, lower_bound_count, LowerBoundCheck, Tuni};
