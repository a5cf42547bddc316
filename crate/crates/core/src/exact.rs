use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{OccupancyError, Result};

/// A probability held as a reduced fraction of arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactProbability(BigRational);

impl ExactProbability {
    /// Wraps `value`, which must lie in `[0, 1]`.
    pub fn new(value: BigRational) -> Result<Self> {
        if value.is_negative() || value > BigRational::one() {
            return Err(OccupancyError::NumericInstability {
                step: 0,
                detail: format!("exact probability {value} outside [0, 1]"),
            });
        }
        Ok(Self(value))
    }

    pub fn from_parts(numerator: BigInt, denominator: BigInt) -> Result<Self> {
        if denominator.is_zero() {
            return Err(OccupancyError::InvalidProblem("zero denominator".into()));
        }
        Self::new(BigRational::new(numerator, denominator))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    /// Nearest `f64`.
    pub fn to_f64(&self) -> f64 {
        // Ratio::to_f64 handles numerators and denominators beyond f64 range.
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for ExactProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator(), self.denominator())
    }
}
