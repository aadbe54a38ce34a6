//! Dyadic rationals `num / 2^exp` with exact arbitrary-precision arithmetic.
//!
//! Every value is held in canonical form: the numerator is odd, or the value
//! is zero and stored as `0 / 2^0`. Canonical form makes structural equality
//! coincide with numerical equality, so `Dyadic` works directly as an ordered
//! map key and derives `Hash`.
//!
//! The text form is `num/2^exp`, with plain integers written without the
//! denominator (`"3"`, `"-5/2^3"`). Serialization round-trips bit-exactly.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseDyadicError {
    #[error("empty dyadic literal")]
    Empty,
    #[error("malformed dyadic literal `{0}`: expected `num` or `num/2^exp`")]
    Malformed(String),
}

/// A dyadic rational in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: u64,
}

impl Dyadic {
    /// Builds `num / 2^exp` and normalizes: factors of two are moved out of
    /// the numerator, and zero collapses to `0 / 2^0`.
    pub fn new(num: impl Into<BigInt>, exp: u64) -> Self {
        let mut num = num.into();
        let mut exp = exp;
        if num.is_zero() {
            return Dyadic { num, exp: 0 };
        }
        if let Some(tz) = num.trailing_zeros() {
            let shift = tz.min(exp);
            if shift > 0 {
                num >>= shift;
                exp -= shift;
            }
        }
        Dyadic { num, exp }
    }

    pub fn zero() -> Self {
        Dyadic {
            num: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic::from(1)
    }

    /// `2^e` for any integer `e`, including negative.
    pub fn pow2(e: i64) -> Self {
        Dyadic::one().mul_pow2(e)
    }

    pub fn num(&self) -> &BigInt {
        &self.num
    }

    pub fn exp(&self) -> u64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    /// The numerator when the value is an integer (`exp == 0`).
    pub fn as_integer(&self) -> Option<&BigInt> {
        (self.exp == 0).then_some(&self.num)
    }

    /// Exact multiplication by `2^e`. The numerator stays odd, so only the
    /// exponent moves (with a shift into the numerator once `exp` hits zero).
    pub fn mul_pow2(&self, e: i64) -> Self {
        if self.num.is_zero() {
            return Dyadic::zero();
        }
        if e >= 0 {
            let e = e as u64;
            if self.exp >= e {
                Dyadic {
                    num: self.num.clone(),
                    exp: self.exp - e,
                }
            } else {
                Dyadic {
                    num: &self.num << (e - self.exp),
                    exp: 0,
                }
            }
        } else {
            // An integer numerator may be even, so renormalize after the shift.
            let down = e.unsigned_abs();
            let exp = self
                .exp
                .checked_add(down)
                .expect("dyadic exponent overflow");
            Dyadic::new(self.num.clone(), exp)
        }
    }

    /// Numerator of `self` rewritten over the denominator `2^exp`.
    /// Requires `exp >= self.exp`.
    fn scaled_num(&self, exp: u64) -> BigInt {
        debug_assert!(exp >= self.exp);
        &self.num << (exp - self.exp)
    }
}

impl From<i64> for Dyadic {
    fn from(n: i64) -> Self {
        Dyadic {
            num: BigInt::from(n),
            exp: 0,
        }
    }
}

impl From<BigInt> for Dyadic {
    fn from(n: BigInt) -> Self {
        Dyadic { num: n, exp: 0 }
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        Dyadic::new(self.scaled_num(exp) + rhs.scaled_num(exp), exp)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        Dyadic::new(self.scaled_num(exp) - rhs.scaled_num(exp), exp)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            num: -&self.num,
            exp: self.exp,
        }
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, d| &acc + &d)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    /// Exact comparison by cross-multiplication over the common denominator
    /// `2^max(exp)`; equal values compare equal regardless of how they were
    /// produced, because both sides are canonical.
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.num.sign(), other.num.sign()) {
            (a, b) if a != b => return a.cmp(&b),
            _ => {}
        }
        let exp = self.exp.max(other.exp);
        self.scaled_num(exp).cmp(&other.scaled_num(exp))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

impl FromStr for Dyadic {
    type Err = ParseDyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseDyadicError::Empty);
        }
        let bad = || ParseDyadicError::Malformed(s.to_string());
        match s.split_once('/') {
            None => {
                let num = BigInt::from_str(s).map_err(|_| bad())?;
                Ok(Dyadic::new(num, 0))
            }
            Some((num, den)) => {
                let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
                let exp = den
                    .trim()
                    .strip_prefix("2^")
                    .and_then(|e| u64::from_str(e).ok())
                    .ok_or_else(bad)?;
                Ok(Dyadic::new(num, exp))
            }
        }
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
