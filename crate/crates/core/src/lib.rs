//! Allocation-only core of `moanytime`.
//!
//! Everything in this crate is a pure function over in-memory data: Pareto
//! dominance and non-dominated filtering, unary quality indicators
//! (hypervolume, IGD+, R2, additive and multiplicative epsilon), anytime
//! trajectories over unbounded archives, empirical attainment functions,
//! bootstrap robust ranking and Friedman/Nemenyi statistics. The benchmark
//! problems and the two baseline optimizers used to produce data also live
//! here because they only need an RNG.
//!
//! File formats, ingestion and the command line are in the `moanytime`
//! companion crate.
#![no_std]

extern crate alloc;

pub mod algorithms;
pub mod anytime;
pub mod eaf;
mod error;
pub mod hypervolume;
pub mod indicators;
pub mod objective;
pub mod problems;
pub mod ranking;
pub mod rng;
mod staircase;
pub mod stats;

pub use error::{Error, Result};
pub use objective::{
    dominates, ideal_and_worst, nondominated_filter, Decision, ObjectiveVector, ParetoSet,
    Solution,
};
