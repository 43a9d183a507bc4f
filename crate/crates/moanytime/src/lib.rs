//! Files, ingestion, experiments and the command line for anytime
//! multi-objective benchmarking. The numerical work lives in
//! [`moanytime_core`], re-exported as [`core`].

pub use moanytime_core as core;

pub mod analysis;
pub mod cli;
pub mod dataset;
mod error;
pub mod experiment;
pub mod export;
pub mod format;
pub mod logging;
pub mod refset;

pub use dataset::{ingest, DataSet, RunEntry, RunKey};
pub use error::{Error, Result};
pub use logging::{open_logger, parse_experiment, parse_run, RunArchive, RunLogger, RunMeta, StoreMode};
