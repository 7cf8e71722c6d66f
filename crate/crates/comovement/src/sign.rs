//! Signs and joint increments.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Neg;

/// A lattice step direction, `+1` or `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_i64(self) -> i64 {
        self.as_i8() as i64
    }

    /// `+1` for a strictly positive value, `-1` otherwise (zero maps to `-1`).
    ///
    /// This is the sign convention used everywhere in the crate: a flat move
    /// counts as a down move.
    pub fn of_diff(diff: f64) -> Sign {
        if diff > 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn is_up(self) -> bool {
        self == Sign::Plus
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("sign must be +1 or -1, got {other}")),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        s.as_i8()
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.as_i8())
    }
}

/// One joint increment of the pair of walks: `xi` drives the first walk,
/// `eta` the second. Exactly four values are possible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignPair {
    pub xi: Sign,
    pub eta: Sign,
}

impl SignPair {
    pub const BOTH_UP: SignPair = SignPair {
        xi: Sign::Plus,
        eta: Sign::Plus,
    };
    pub const UP_DOWN: SignPair = SignPair {
        xi: Sign::Plus,
        eta: Sign::Minus,
    };
    pub const DOWN_UP: SignPair = SignPair {
        xi: Sign::Minus,
        eta: Sign::Plus,
    };
    pub const BOTH_DOWN: SignPair = SignPair {
        xi: Sign::Minus,
        eta: Sign::Minus,
    };

    /// All four joint increments, in the fixed enumeration order used by the
    /// step pmf and the exhaustive oracle.
    pub const ALL: [SignPair; 4] = [
        SignPair::BOTH_UP,
        SignPair::UP_DOWN,
        SignPair::DOWN_UP,
        SignPair::BOTH_DOWN,
    ];

    pub fn new(xi: Sign, eta: Sign) -> SignPair {
        SignPair { xi, eta }
    }

    /// True when both walks moved in the same direction (a common movement).
    pub fn is_common(self) -> bool {
        self.xi == self.eta
    }

    /// Index of this pair in [`SignPair::ALL`].
    pub fn index(self) -> usize {
        match (self.xi, self.eta) {
            (Sign::Plus, Sign::Plus) => 0,
            (Sign::Plus, Sign::Minus) => 1,
            (Sign::Minus, Sign::Plus) => 2,
            (Sign::Minus, Sign::Minus) => 3,
        }
    }
}

impl fmt::Display for SignPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.xi, self.eta)
    }
}
