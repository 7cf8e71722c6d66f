//! Common/counter-move decomposition of two correlated lattice random walks.
//!
//! Two walks whose steps are `+1`/`-1` either move together or against each
//! other at every step. This crate splits such a pair into a common-move walk
//! `X`, a counter-move walk `Y` and a random clock `T` counting common moves,
//! reconstructs the pair from the pieces, and verifies the distributional
//! facts behind the construction two ways: an exhaustive enumeration oracle
//! with exact rational arithmetic, and a seeded Monte Carlo test harness.
//!
//! Start with [`model::ModelSpec`] to describe the dependence between the
//! walks, [`decompose::decompose`] to split a realized path, and the
//! [`exact`] and [`mc`] modules for the verification machinery. The `book/`
//! directory of the repository walks through the concepts chapter by
//! chapter; its code snippets compile as the doc-tests of [`guide`].

pub mod decompose;
pub mod exact;
pub mod finance;
pub mod gaussian;
pub mod guide;
pub mod history;
pub mod mc;
pub mod model;
pub mod path;
pub mod rational;
pub mod rng;
pub mod sign;

pub use decompose::{decompose, decompose_completed, reconstruct, Completion, Decomposition};
pub use history::History;
pub use model::{ModelSpec, StepPmf};
pub use path::JointPath;
pub use rational::{rat, Rational};
pub use sign::{Sign, SignPair};
