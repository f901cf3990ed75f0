use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Extended-precision real number.
///
/// Binary operations round to the larger of the two operand precisions, so
/// values created from one [`super::PrecisionContext`] stay at that
/// precision. Non-finite results are not trapped per operation; use
/// [`Real::check`] at module boundaries.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(Float);

impl Real {
    pub(crate) fn with_prec<T>(prec: u32, v: T) -> Self
    where
        Float: rug::Assign<T>,
    {
        Real(Float::with_val(prec, v))
    }

    pub(crate) fn parse(prec: u32, s: &str) -> Result<Self> {
        let parsed = Float::parse(s.trim()).map_err(|e| Error::Domain {
            function: "parse",
            detail: format!("{s:?}: {e}"),
        })?;
        Ok(Real(Float::with_val(prec, parsed)))
    }

    pub fn from_float(f: Float) -> Self {
        Real(f)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Copy rounded to `prec` bits.
    pub fn to_prec(&self, prec: u32) -> Self {
        Real(Float::with_val(prec, &self.0))
    }

    /// Same-precision value built from `v`.
    pub fn like<T>(&self, v: T) -> Self
    where
        Float: rug::Assign<T>,
    {
        Real(Float::with_val(self.prec(), v))
    }

    pub fn zero_like(&self) -> Self {
        self.like(0)
    }

    pub fn one_like(&self) -> Self {
        self.like(1)
    }

    pub fn pi_like(&self) -> Self {
        self.like(Constant::Pi)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    /// Turns NaN/infinity into a typed error.
    pub fn check(self, what: &'static str) -> Result<Self> {
        if self.0.is_finite() {
            Ok(self)
        } else {
            Err(Error::NotFinite(what))
        }
    }

    pub fn abs(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.abs_ref()))
    }

    pub fn sqrt(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.sqrt_ref()))
    }

    pub fn exp(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.exp_ref()))
    }

    pub fn ln(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.ln_ref()))
    }

    pub fn recip(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.recip_ref()))
    }

    pub fn square(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.square_ref()))
    }

    pub fn powi(&self, k: i32) -> Self {
        Real(Float::with_val(self.prec(), (&self.0).pow(k)))
    }

    pub fn pow(&self, e: &Real) -> Self {
        let prec = self.prec().max(e.prec());
        Real(Float::with_val(prec, (&self.0).pow(&e.0)))
    }

    /// Raw MPFR gamma; see [`super::gamma`] for the checked entry point.
    pub(crate) fn gamma_unchecked(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.gamma_ref()))
    }

    pub(crate) fn ln_gamma_unchecked(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.ln_gamma_ref()))
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }

    /// Fixed-point decimal string with exactly `decimals` places.
    pub fn to_fixed(&self, decimals: usize) -> String {
        if !self.0.is_finite() {
            return self.0.to_string();
        }
        if self.0.is_zero() {
            return format!("{:.*}", decimals, 0.0);
        }
        let (_, _, exp) = self.0.to_sign_string_exp(10, Some(1));
        let int_digits = exp.unwrap_or(0);
        let sig = (int_digits + decimals as i32).max(1) as usize;
        let (neg, digits, exp) = self.0.to_sign_string_exp(10, Some(sig));
        let exp = exp.unwrap_or(0);
        // rounding may have carried into a new leading digit
        let mut body = String::new();
        if exp <= 0 {
            let lead = (-exp) as usize;
            let mut frac = "0".repeat(lead);
            frac.push_str(&digits);
            frac.truncate(decimals);
            while frac.len() < decimals {
                frac.push('0');
            }
            body.push('0');
            if decimals > 0 {
                body.push('.');
                body.push_str(&frac);
            }
        } else {
            let exp = exp as usize;
            let mut all = digits.clone();
            while all.len() < exp + decimals {
                all.push('0');
            }
            body.push_str(&all[..exp]);
            if decimals > 0 {
                body.push('.');
                body.push_str(&all[exp..exp + decimals]);
            }
        }
        if neg && body.chars().any(|c| c != '0' && c != '.') {
            format!("-{body}")
        } else {
            body
        }
    }

    /// Scientific notation with `sig` significant digits.
    pub fn to_sci(&self, sig: usize) -> String {
        if !self.0.is_finite() {
            return self.0.to_string();
        }
        if self.0.is_zero() {
            return "0".to_string();
        }
        let (neg, digits, exp) = self.0.to_sign_string_exp(10, Some(sig.max(1)));
        let exp = exp.unwrap_or(0) - 1;
        let sign = if neg { "-" } else { "" };
        let (head, tail) = digits.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        }
    }

    /// Decimal string carrying every significant digit of the working
    /// precision (round-trips through [`super::PrecisionContext::parse`]).
    pub fn to_full_string(&self) -> String {
        let sig = (f64::from(self.prec()) / std::f64::consts::LOG2_10).ceil() as usize + 1;
        self.to_sci(sig)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({})", self.to_sci(25))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => f.write_str(&self.to_fixed(p)),
            None => f.write_str(&self.to_sci(30)),
        }
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(Float::with_val(self.prec(), -&self.0))
    }
}

macro_rules! real_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                let prec = self.prec().max(rhs.prec());
                Real(Float::with_val(prec, $tr::$m(&self.0, &rhs.0)))
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                $tr::$m(self, &rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                $tr::$m(&self, rhs)
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                $tr::$m(&self, &rhs)
            }
        }
        impl $tr<f64> for &Real {
            type Output = Real;
            fn $m(self, rhs: f64) -> Real {
                Real(Float::with_val(self.prec(), $tr::$m(&self.0, rhs)))
            }
        }
        impl $tr<f64> for Real {
            type Output = Real;
            fn $m(self, rhs: f64) -> Real {
                $tr::$m(&self, rhs)
            }
        }
        impl $tr<i32> for &Real {
            type Output = Real;
            fn $m(self, rhs: i32) -> Real {
                Real(Float::with_val(self.prec(), $tr::$m(&self.0, rhs)))
            }
        }
        impl $tr<i32> for Real {
            type Output = Real;
            fn $m(self, rhs: i32) -> Real {
                $tr::$m(&self, rhs)
            }
        }
        impl $atr<&Real> for Real {
            fn $am(&mut self, rhs: &Real) {
                if rhs.prec() > self.prec() {
                    self.0.set_prec(rhs.prec());
                }
                $atr::$am(&mut self.0, &rhs.0);
            }
        }
        impl $atr<Real> for Real {
            fn $am(&mut self, rhs: Real) {
                $atr::$am(self, &rhs);
            }
        }
    };
}

real_binop!(Add, add, AddAssign, add_assign);
real_binop!(Sub, sub, SubAssign, sub_assign);
real_binop!(Mul, mul, MulAssign, mul_assign);
real_binop!(Div, div, DivAssign, div_assign);

impl Sub<&Real> for i32 {
    type Output = Real;
    fn sub(self, rhs: &Real) -> Real {
        Real(Float::with_val(rhs.prec(), self - &rhs.0))
    }
}

impl Div<&Real> for i32 {
    type Output = Real;
    fn div(self, rhs: &Real) -> Real {
        Real(Float::with_val(rhs.prec(), self / &rhs.0))
    }
}

impl PartialEq<f64> for Real {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for Real {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

impl std::iter::Sum for Real {
    /// Panics on an empty iterator since no precision can be inferred.
    fn sum<I: Iterator<Item = Real>>(mut iter: I) -> Real {
        let mut acc = iter.next().expect("sum of an empty Real iterator");
        for x in iter {
            acc += x;
        }
        acc
    }
}
