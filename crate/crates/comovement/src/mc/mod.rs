//! Seeded Monte Carlo estimation and hypothesis tests.
//!
//! Everything here is driven by one root seed: replication `r` reads the
//! sub-streams `(seed, Path, r)`, `(seed, CompletionZeta, r)` and
//! `(seed, CompletionPsi, r)`, so counts are identical whether replications
//! run serially or across any number of threads. Parallel runs accumulate
//! integer counts per worker and merge by addition; no floating-point
//! reductions cross thread boundaries.

pub mod chi_square;
pub mod harness;

use crate::exact::OracleError;
use crate::model::ModelError;
use serde::Serialize;
use thiserror::Error;

pub use chi_square::{chi_square_uniform, g_test_independence};
pub use harness::{
    biased_walk_tests, calibrate_events, estimate_delta_t, independence_test_xyt, mc_block_pmf,
    sample_events,
};

/// Default verdict significance; small enough that a suite of dozens of
/// tests stays quiet under the null.
pub const DEFAULT_SIGNIFICANCE: f64 = 0.001;

#[derive(Debug, Error)]
pub enum McError {
    #[error("undersampled: {detail}; need at least {required_reps} replications")]
    Undersampled { required_reps: u64, detail: String },
    #[error("degenerate contingency table: {detail}")]
    DegenerateTable { detail: String },
    #[error("bad arguments: {detail}")]
    BadArguments { detail: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Result of one Monte Carlo test or estimate.
///
/// `pass` is the verdict at `significance`: for goodness-of-fit tests it is
/// `p_value > significance`, for estimate-style checks the stated sigma rule
/// of the test (documented per harness function).
#[derive(Clone, Debug, Serialize)]
pub struct TestReport {
    pub test_name: String,
    pub sample_size: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub df: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub significance: f64,
    pub pass: bool,
}

/// Counts of joint sign vectors over the first `k` common-walk and `l`
/// counter-walk increments, one cell per vector. Cell index: bit `i` set
/// when entry `i` of the vector is an up move, common entries in the low
/// bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockCounts {
    pub k: usize,
    pub l: usize,
    pub counts: Vec<u64>,
    pub reps: u64,
}

impl BlockCounts {
    pub fn cells(&self) -> usize {
        self.counts.len()
    }
}
