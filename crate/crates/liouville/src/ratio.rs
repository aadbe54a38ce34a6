//! Exact rational numbers, serialized as `p/q` strings.
//!
//! Certificates, objective values, and transition probabilities are all ratios
//! of integers. This thin wrapper keeps them reduced, orders them exactly, and
//! pins the text form `p/q` (always with an explicit positive denominator) so
//! artifacts are byte-stable.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRatioError {
    #[error("malformed ratio literal `{0}`: expected `p/q` or an integer")]
    Malformed(String),
    #[error("ratio literal `{0}` has zero denominator")]
    ZeroDenominator(String),
}

/// A reduced exact rational with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Ratio(BigRational);

impl Ratio {
    /// Builds `p / q`. Panics if `q == 0`.
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Self {
        let q = q.into();
        assert!(!q.is_zero(), "ratio denominator must be nonzero");
        Ratio(BigRational::new(p.into(), q))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Ratio(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Ratio(BigRational::zero())
    }

    pub fn one() -> Self {
        Ratio(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn abs_diff(&self, other: &Ratio) -> Ratio {
        Ratio((&self.0 - &other.0).abs())
    }

    pub fn half(&self) -> Ratio {
        Ratio(&self.0 / BigRational::from_integer(BigInt::from(2)))
    }

    /// Lossy float view, for display and for stochastic acceptance rules.
    /// Never feeds back into an exact result.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl Add<&Ratio> for &Ratio {
    type Output = Ratio;
    fn add(self, rhs: &Ratio) -> Ratio {
        Ratio(&self.0 + &rhs.0)
    }
}

impl Sub<&Ratio> for &Ratio {
    type Output = Ratio;
    fn sub(self, rhs: &Ratio) -> Ratio {
        Ratio(&self.0 - &rhs.0)
    }
}

impl Mul<&Ratio> for &Ratio {
    type Output = Ratio;
    fn mul(self, rhs: &Ratio) -> Ratio {
        Ratio(&self.0 * &rhs.0)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for Ratio {
    type Err = ParseRatioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseRatioError::Malformed(s.to_string());
        match s.split_once('/') {
            None => {
                let p = BigInt::from_str(s.trim()).map_err(|_| bad())?;
                Ok(Ratio::from_integer(p))
            }
            Some((p, q)) => {
                let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
                let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
                if q.is_zero() {
                    return Err(ParseRatioError::ZeroDenominator(s.to_string()));
                }
                Ok(Ratio(BigRational::new(p, q)))
            }
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
