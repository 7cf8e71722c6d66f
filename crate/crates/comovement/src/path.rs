//! Finite realizations of the pair of walks.

use crate::sign::{Sign, SignPair};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("a path must have at least one step")]
    Empty,
    #[error("walk sequences must have equal length (got {0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("increment at step {step} is not a unit move: B jumps by {db}, W by {dw}")]
    BadIncrement { step: usize, db: i64, dw: i64 },
}

/// A finite joint realization of the two walks, stored as its increments.
///
/// Both walks start at 0; the values at step `n` are the partial sums of the
/// `xi` and `eta` components, so they are consistent with the increments by
/// construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct JointPath {
    pairs: Vec<SignPair>,
}

impl<'de> serde::Deserialize<'de> for JointPath {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<JointPath, D::Error> {
        let pairs = Vec::<SignPair>::deserialize(de)?;
        JointPath::from_pairs(pairs).map_err(serde::de::Error::custom)
    }
}

impl JointPath {
    pub fn from_pairs(pairs: Vec<SignPair>) -> Result<JointPath, PathError> {
        if pairs.is_empty() {
            return Err(PathError::Empty);
        }
        Ok(JointPath { pairs })
    }

    /// Recovers the increments from the walk values `b[0..n], w[0..n]`
    /// (1-based steps; the implicit starting values are 0).
    pub fn from_values(b: &[i64], w: &[i64]) -> Result<JointPath, PathError> {
        if b.len() != w.len() {
            return Err(PathError::LengthMismatch(b.len(), w.len()));
        }
        if b.is_empty() {
            return Err(PathError::Empty);
        }
        let mut pairs = Vec::with_capacity(b.len());
        let (mut prev_b, mut prev_w) = (0i64, 0i64);
        for (i, (&bn, &wn)) in b.iter().zip(w).enumerate() {
            let (db, dw) = (bn - prev_b, wn - prev_w);
            if db.abs() != 1 || dw.abs() != 1 {
                return Err(PathError::BadIncrement {
                    step: i + 1,
                    db,
                    dw,
                });
            }
            let xi = if db > 0 { Sign::Plus } else { Sign::Minus };
            let eta = if dw > 0 { Sign::Plus } else { Sign::Minus };
            pairs.push(SignPair::new(xi, eta));
            (prev_b, prev_w) = (bn, wn);
        }
        Ok(JointPath { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[SignPair] {
        &self.pairs
    }

    pub fn pair(&self, step: usize) -> SignPair {
        self.pairs[step - 1]
    }

    /// First-walk values `B_1..B_N`.
    pub fn b_values(&self) -> Vec<i64> {
        self.pairs
            .iter()
            .scan(0i64, |acc, p| {
                *acc += p.xi.as_i64();
                Some(*acc)
            })
            .collect()
    }

    /// Second-walk values `W_1..W_N`.
    pub fn w_values(&self) -> Vec<i64> {
        self.pairs
            .iter()
            .scan(0i64, |acc, p| {
                *acc += p.eta.as_i64();
                Some(*acc)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip() {
        let pairs = vec![SignPair::UP_DOWN, SignPair::BOTH_DOWN, SignPair::BOTH_UP];
        let path = JointPath::from_pairs(pairs.clone()).unwrap();
        assert_eq!(path.b_values(), vec![1, 0, 1]);
        assert_eq!(path.w_values(), vec![-1, -2, -1]);
        let back = JointPath::from_values(&path.b_values(), &path.w_values()).unwrap();
        assert_eq!(back.pairs(), pairs.as_slice());
    }

    #[test]
    fn rejects_non_unit_increment() {
        let err = JointPath::from_values(&[2, 1], &[1, 0]).unwrap_err();
        assert_eq!(
            err,
            PathError::BadIncrement {
                step: 1,
                db: 2,
                dw: 1
            }
        );
    }

    #[test]
    fn rejects_empty() {
        assert_eq!(
            JointPath::from_values(&[], &[]).unwrap_err(),
            PathError::Empty
        );
    }
}
