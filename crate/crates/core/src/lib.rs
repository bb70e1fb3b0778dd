//! Random geometric graphs with location dependent edge weights, their
//! minimum spanning forests, and the tooling to check the asymptotic variance
//! and deviation bounds for the forest weight by simulation.
//!
//! Layout:
//! - [`sampling`]: binomial, Poisson and coupled node configurations
//! - [`rgg`]: graph construction on a bucket grid, radius rules
//! - [`mst`]: filter-Kruskal forests and an exhaustive oracle
//! - [`tiling`]: the two-level square grid, occupancy events, gap sums and the constructive tree
//! - [`bounds`]: the constants `C1(A)`, `C2(A)`, their optima and the deviation thresholds
//! - [`experiments`]: Monte Carlo sweeps, reports and the CLI entry point

pub mod bounds;
pub mod dsu;
pub mod error;
pub mod experiments;
pub mod mst;
pub mod rgg;
pub mod rng;
pub mod sampling;
pub mod tiling;

pub use error::{Error, Result};
