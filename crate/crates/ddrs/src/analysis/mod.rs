//! Desk-scale meta-theory: enumeration, normal-form grammars, ground
//! confluence checks, weight certificates and status reports.

pub mod certificate;
pub mod confluence;
pub mod enumerate;
pub mod grammar;
pub mod status;
pub mod weight;

use thiserror::Error;

pub use certificate::{certify_uniqueness, UniquenessCertificate};
pub use confluence::{
    check_ground_confluence, check_ground_confluence_auto, check_ground_confluence_with, GroundCheckConfig,
    GroundCheckReport, NfOracle,
};
pub use enumerate::enumerate_closed;
pub use grammar::{grammar_for, NormalFormGrammar};
pub use status::status_report;
pub use weight::{check_weight_certificate, WeightExpr, WeightFunction, WeightVerdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("no normal-form grammar is documented for `{0}`")]
    UnknownGrammar(String),
}

/// Worker count: `DDRS_WORKERS` if set to a positive integer, else the
/// available parallelism.
pub fn workers() -> usize {
    std::env::var("DDRS_WORKERS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// A thread pool sized by [`workers`].
pub fn pool() -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers())
        .build()
        .expect("thread pool")
}
