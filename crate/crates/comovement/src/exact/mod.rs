//! Exhaustive enumeration of weighted paths with exact arithmetic.
//!
//! For an exact-rational model, every length-`n` joint path has a rational
//! probability: the product of its conditional step masses. Enumerating all
//! `4^n` of them turns distributional identities into finite sums that either
//! hold exactly or fail with a concrete witness — no tolerances involved.
//! [`checks`] builds the identity verifications on top; this module provides
//! the walk itself and event probabilities.
//!
//! The enumerator shares prefixes: it advances through the paths in
//! lexicographic order (in [`SignPair::ALL`] order per step) like an
//! odometer, recomputing weights only from the deepest changed step, so the
//! total rational work is proportional to the number of paths, not paths
//! times depth.

pub mod checks;
pub mod events;

use crate::history::History;
use crate::model::{ModelError, ModelSpec};
use crate::path::JointPath;
use crate::rational::{rat_one, rat_zero, Rational};
use crate::sign::SignPair;
use num::Zero;
use thiserror::Error;

pub use checks::{
    check_biased_formula, check_c1_factorization, check_halving_recursion, check_sign_symmetry,
    minimal_factorization_witness, ExactReport, Witness,
};
pub use events::EventSpec;

/// Horizons above this need an explicit cap override; `4^n` paths get
/// expensive fast.
pub const DEFAULT_HORIZON_CAP: usize = 10;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("the exhaustive oracle needs an exact-rational model, got {kind}")]
    ExactnessRequired { kind: &'static str },
    #[error("horizon {n} exceeds the cap {cap} (would enumerate {paths:.2e} weighted paths); raise the cap explicitly if you mean it")]
    HorizonTooLarge { n: usize, cap: usize, paths: f64 },
    #[error("enumeration needs a horizon of at least one step")]
    ZeroHorizon,
    #[error("indices must be nonzero, strictly increasing and within the horizon: {detail}")]
    BadIndices { detail: String },
    #[error("this identity needs fair marginals (p = 1/2); the {kind} model is biased")]
    FairMarginalsRequired { kind: &'static str },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One enumerated path together with its exact probability.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedPath {
    pub path: JointPath,
    pub prob: Rational,
}

/// Iterates over all `4^n` weighted paths of the model (zero-probability
/// paths included), with [`DEFAULT_HORIZON_CAP`] as the cost guard.
pub fn enumerate_paths(model: &ModelSpec, n: usize) -> Result<PathEnumerator<'_>, OracleError> {
    enumerate_paths_capped(model, n, DEFAULT_HORIZON_CAP)
}

/// [`enumerate_paths`] with an explicit horizon cap.
pub fn enumerate_paths_capped(
    model: &ModelSpec,
    n: usize,
    cap: usize,
) -> Result<PathEnumerator<'_>, OracleError> {
    if !model.is_exact() {
        return Err(OracleError::ExactnessRequired {
            kind: model.kind_name(),
        });
    }
    if n == 0 {
        return Err(OracleError::ZeroHorizon);
    }
    if n > cap {
        return Err(OracleError::HorizonTooLarge {
            n,
            cap,
            paths: 4f64.powi(n as i32),
        });
    }
    // After this probe the walk cannot hit an out-of-range theta on any
    // positive-probability prefix.
    model.validate_with(n, 0)?;
    Ok(PathEnumerator::new(model, n))
}

/// Exact probability of `predicate` under the model's length-`n` law.
pub fn exact_event_prob<F>(
    model: &ModelSpec,
    n: usize,
    predicate: F,
) -> Result<Rational, OracleError>
where
    F: FnMut(&JointPath) -> bool,
{
    exact_event_prob_capped(model, n, DEFAULT_HORIZON_CAP, predicate)
}

pub fn exact_event_prob_capped<F>(
    model: &ModelSpec,
    n: usize,
    cap: usize,
    mut predicate: F,
) -> Result<Rational, OracleError>
where
    F: FnMut(&JointPath) -> bool,
{
    let mut total = rat_zero();
    for wp in enumerate_paths_capped(model, n, cap)? {
        if !wp.prob.is_zero() && predicate(&wp.path) {
            total += wp.prob;
        }
    }
    Ok(total)
}

/// Exact probabilities of several events in one enumeration pass.
pub fn exact_event_probs(
    model: &ModelSpec,
    n: usize,
    events: &[EventSpec],
) -> Result<Vec<Rational>, OracleError> {
    let mut totals = vec![rat_zero(); events.len()];
    for wp in enumerate_paths(model, n)? {
        if wp.prob.is_zero() {
            continue;
        }
        for (event, total) in events.iter().zip(totals.iter_mut()) {
            if event.eval(&wp.path) {
                *total += wp.prob.clone();
            }
        }
    }
    Ok(totals)
}

/// Prefix-sharing walk over all `4^n` paths in lexicographic order.
pub struct PathEnumerator<'m> {
    model: &'m ModelSpec,
    horizon: usize,
    /// Branch choice per step, each in `0..4` ([`SignPair::ALL`] index).
    digits: Vec<usize>,
    /// Prefix of the current path, kept in sync with `digits[..len]`.
    prefix: History,
    /// `weights[i]` is the probability of the prefix through step `i + 1`.
    weights: Vec<Rational>,
    started: bool,
    done: bool,
}

impl<'m> PathEnumerator<'m> {
    fn new(model: &'m ModelSpec, horizon: usize) -> PathEnumerator<'m> {
        PathEnumerator {
            model,
            horizon,
            digits: vec![0; horizon],
            prefix: History::empty(),
            weights: Vec::with_capacity(horizon),
            started: false,
            done: false,
        }
    }

    /// Extends `prefix`/`weights` from their current depth to the horizon
    /// following `digits`.
    fn fill_from_current_depth(&mut self) {
        while self.prefix.len() < self.horizon {
            let level = self.prefix.len();
            let pair = SignPair::ALL[self.digits[level]];
            let parent = if level == 0 {
                rat_one()
            } else {
                self.weights[level - 1].clone()
            };
            let weight = if parent.is_zero() {
                // Dead subtree: no need to query the model, and the model is
                // not required to have a valid theta on unreachable prefixes.
                rat_zero()
            } else {
                let pmf = self
                    .model
                    .step_distribution_exact(&self.prefix)
                    .expect("validated up front");
                parent * pmf.prob(pair)
            };
            self.prefix.push(pair);
            self.weights.push(weight);
        }
    }

    fn current(&self) -> WeightedPath {
        WeightedPath {
            path: JointPath::from_pairs(self.prefix.steps().to_vec()).expect("horizon >= 1"),
            prob: self.weights[self.horizon - 1].clone(),
        }
    }
}

impl Iterator for PathEnumerator<'_> {
    type Item = WeightedPath;

    fn next(&mut self) -> Option<WeightedPath> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.fill_from_current_depth();
            return Some(self.current());
        }
        // Odometer step: bump the deepest non-maximal digit, reset the tail.
        let mut level = self.horizon;
        loop {
            if level == 0 {
                self.done = true;
                return None;
            }
            level -= 1;
            if self.digits[level] < 3 {
                break;
            }
            self.digits[level] = 0;
        }
        self.digits[level] += 1;
        while self.prefix.len() > level {
            self.prefix.pop();
            self.weights.pop();
        }
        self.fill_from_current_depth();
        Some(self.current())
    }
}
