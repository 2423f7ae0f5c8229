//! Synthetic travel-fraud heterogeneous graphs with injected fraud rings,
//! plus the analytics, splits, metrics and baselines used to evaluate
//! detectors on them.

pub mod baselines;
pub mod cli;
pub mod config;
pub mod error;
pub mod export;
pub mod generate;
pub mod graph;
pub mod legit;
pub mod metrics;
pub mod projection;
pub mod rings;
pub mod rng;
pub mod sampling;
pub mod schema;
pub mod split;
pub mod stats;
pub mod sweep;
