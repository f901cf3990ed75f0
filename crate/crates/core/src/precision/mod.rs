//! Configurable-precision reals backed by MPFR, plus the scalar special
//! functions the integral code needs.

mod real;
mod special;

pub use real::Real;
pub use special::{gamma, hyp2f1_series, incomplete_beta, moment_integral, HYP2F1_TERM_CAP};

use crate::error::{Error, Result};

/// Minimum supported number of decimal digits.
pub const MIN_DIGITS: u32 = 30;

/// Working precision: `digits` significant decimals plus `guard_digits`
/// carried internally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    digits: u32,
    guard_digits: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            digits: 50,
            guard_digits: 10,
        }
    }
}

impl PrecisionContext {
    pub fn new(digits: u32, guard_digits: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(Error::PrecisionTooLow(digits));
        }
        Ok(PrecisionContext { digits, guard_digits })
    }

    /// Context with the default 10 guard digits.
    pub fn with_digits(digits: u32) -> Result<Self> {
        Self::new(digits, 10)
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn guard_digits(&self) -> u32 {
        self.guard_digits
    }

    /// Binary precision in bits covering `digits + guard_digits` decimals.
    pub fn bits(&self) -> u32 {
        let dec = f64::from(self.digits + self.guard_digits);
        (dec * std::f64::consts::LOG2_10).ceil() as u32
    }

    pub fn zero(&self) -> Real {
        Real::with_prec(self.bits(), 0)
    }

    pub fn one(&self) -> Real {
        Real::with_prec(self.bits(), 1)
    }

    pub fn int(&self, v: i64) -> Real {
        Real::with_prec(self.bits(), v)
    }

    /// Exact conversion of a binary double.
    pub fn from_f64(&self, v: f64) -> Real {
        Real::with_prec(self.bits(), v)
    }

    /// Parses a decimal literal at full precision, e.g. `"137.0359895"`.
    pub fn parse(&self, s: &str) -> Result<Real> {
        Real::parse(self.bits(), s)
    }

    /// Exact rational `num/den` rounded once.
    pub fn ratio(&self, num: i64, den: i64) -> Real {
        self.int(num) / self.int(den)
    }

    /// `10^(-k)`, e.g. `tolerance(digits - 10)`.
    pub fn pow10(&self, k: i32) -> Real {
        self.int(10).powi(k)
    }

    /// `10^(-digits + slack)`: the natural comparison threshold for results
    /// that lose at most `slack` digits.
    pub fn tolerance(&self, slack: i32) -> Real {
        self.pow10(slack - self.digits as i32)
    }

    /// Same context with `extra` more significant digits.
    pub fn raised(&self, extra: u32) -> Self {
        PrecisionContext {
            digits: self.digits + extra,
            guard_digits: self.guard_digits,
        }
    }

    /// Brings a value to this context's precision.
    pub fn adopt(&self, v: &Real) -> Real {
        v.to_prec(self.bits())
    }
}
