//! Exact rational values and their JSON form.
//!
//! Probabilities that feed the exhaustive oracle are arbitrary-precision
//! rationals. On the wire they appear as `{"num": ..., "den": ...}` pairs;
//! each component is a JSON integer when it fits in 64 bits and a decimal
//! string otherwise, so nothing is ever rounded.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

pub type Rational = BigRational;

/// Shorthand for small literal rationals.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_zero() -> Rational {
    Rational::zero()
}

pub fn rat_one() -> Rational {
    Rational::one()
}

pub fn rat_half() -> Rational {
    rat(1, 2)
}

/// Parses `"a/b"` or `"a"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|e| format!("bad numerator {num:?}: {e}"))?;
    let den = BigInt::from_str(den).map_err(|e| format!("bad denominator {den:?}: {e}"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(num, den))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
enum IntRepr {
    Small(i64),
    Big(String),
}

impl From<&BigInt> for IntRepr {
    fn from(v: &BigInt) -> IntRepr {
        match i64::try_from(v.clone()) {
            Ok(small) => IntRepr::Small(small),
            Err(_) => IntRepr::Big(v.to_string()),
        }
    }
}

impl TryFrom<&IntRepr> for BigInt {
    type Error = String;
    fn try_from(v: &IntRepr) -> Result<BigInt, String> {
        match v {
            IntRepr::Small(i) => Ok(BigInt::from(*i)),
            IntRepr::Big(s) => BigInt::from_str(s).map_err(|e| format!("bad integer {s:?}: {e}")),
        }
    }
}

/// Wire form of a [`Rational`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RationalRepr {
    num: IntRepr,
    den: IntRepr,
}

impl From<&Rational> for RationalRepr {
    fn from(r: &Rational) -> RationalRepr {
        RationalRepr {
            num: r.numer().into(),
            den: r.denom().into(),
        }
    }
}

impl TryFrom<&RationalRepr> for Rational {
    type Error = String;
    fn try_from(r: &RationalRepr) -> Result<Rational, String> {
        let num = BigInt::try_from(&r.num)?;
        let den = BigInt::try_from(&r.den)?;
        if den.is_zero() {
            return Err("zero denominator".to_string());
        }
        Ok(Rational::new(num, den))
    }
}

/// serde adapter: annotate a `Rational` field with
/// `#[serde(with = "crate::rational::as_repr")]`.
pub mod as_repr {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, ser: S) -> Result<S::Ok, S::Error> {
        RationalRepr::from(r).serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rational, D::Error> {
        let repr = RationalRepr::deserialize(de)?;
        Rational::try_from(&repr).map_err(serde::de::Error::custom)
    }
}

/// Nearest f64; probabilities never overflow this conversion.
pub fn to_f64(r: &Rational) -> f64 {
    num::ToPrimitive::to_f64(r).expect("rational out of f64 range")
}

/// Binomial standard error sqrt(p(1-p)/n) for an exact event probability.
pub fn binomial_stderr(p: &Rational, n: u64) -> f64 {
    let p = to_f64(p);
    (p * (1.0 - p) / n as f64).sqrt()
}

pub fn is_probability(r: &Rational) -> bool {
    !r.is_negative() && *r <= rat_one()
}
