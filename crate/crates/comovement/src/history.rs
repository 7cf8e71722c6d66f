//! Realized step history used to condition the next joint increment.

use crate::sign::{Sign, SignPair};

/// The joint increments realized before the current step.
///
/// When the walks are about to take step `n`, the history holds the pairs
/// for steps `1..n`, i.e. `n - 1` entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct History {
    steps: Vec<SignPair>,
}

impl History {
    pub fn empty() -> History {
        History { steps: Vec::new() }
    }

    pub fn from_steps(steps: Vec<SignPair>) -> History {
        History { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[SignPair] {
        &self.steps
    }

    pub fn push(&mut self, pair: SignPair) {
        self.steps.push(pair);
    }

    pub fn pop(&mut self) -> Option<SignPair> {
        self.steps.pop()
    }

    /// The most recent realized pair, if any.
    pub fn last(&self) -> Option<SignPair> {
        self.steps.last().copied()
    }

    /// Last first-walk sign, the quantity a sign-dependent model peeks at.
    pub fn last_xi(&self) -> Option<Sign> {
        self.last().map(|p| p.xi)
    }

    /// Whether the most recent step was a common movement, i.e. the latest
    /// entry of the induced state sequence.
    pub fn last_common(&self) -> Option<bool> {
        self.last().map(|p| p.is_common())
    }

    /// The induced common/counter state bits for the realized steps.
    pub fn state_bits(&self) -> impl Iterator<Item = bool> + '_ {
        self.steps.iter().map(|p| p.is_common())
    }
}

impl FromIterator<SignPair> for History {
    fn from_iter<I: IntoIterator<Item = SignPair>>(iter: I) -> History {
        History {
            steps: iter.into_iter().collect(),
        }
    }
}
