//! Scalar fields the engine computes over.
//!
//! Identities are checked in exact rational arithmetic; spectral work and
//! inequality checks run on `f64`.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational scalar used for identity checks.
pub type Rational = BigRational;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn as_f64(&self) -> f64;

    fn from_rational(q: &Rational) -> Self;

    /// Best-effort conversion from a float. Exact scalars only accept values
    /// with a finite binary expansion, which covers every literal the tool
    /// parses from decimal input after `parse_scalar`.
    fn from_f64(v: f64) -> Option<Self>;

    fn abs(&self) -> Self {
        if self.as_f64() < 0.0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Zero test at the given tolerance. Exact scalars ignore `tol`.
    fn is_negligible(&self, tol: f64) -> bool;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn as_f64(&self) -> f64 {
        self.to_f64_lossy()
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn from_rational(q: &Rational) -> Self {
        q.to_f64_lossy()
    }

    fn from_f64(v: f64) -> Option<Self> {
        Some(v)
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn is_negligible(&self, tol: f64) -> bool {
        f64::abs(*self) <= tol
    }
}

trait LossyF64 {
    fn to_f64_lossy(&self) -> f64;
}

impl LossyF64 for BigRational {
    fn to_f64_lossy(&self) -> f64 {
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
            _ => {
                // Scale both sides down until they fit.
                let shift = self.numer().bits().max(self.denom().bits()).saturating_sub(1000);
                let n = (self.numer() >> shift).to_f64().unwrap_or(f64::NAN);
                let d = (self.denom() >> shift).to_f64().unwrap_or(f64::NAN);
                n / d
            }
        }
    }
}

/// Parses `"3"`, `"-1/4"` or `"0.25"` into a scalar.
pub fn parse_scalar<S: Scalar>(text: &str) -> Option<S> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(S::from_ratio(n, d));
    }
    if let Ok(v) = text.parse::<i64>() {
        return Some(S::from_i64(v));
    }
    let v: f64 = text.parse().ok()?;
    if !v.is_finite() {
        return None;
    }
    if S::EXACT {
        // Decimal literal: read it as an exact fraction of a power of ten.
        let (int, frac) = text.split_once('.').unwrap_or((text, ""));
        let digits = format!("{int}{frac}");
        let num: i64 = digits.parse().ok()?;
        let den = 10i64.checked_pow(frac.len() as u32)?;
        Some(S::from_ratio(num, den))
    } else {
        S::from_f64(v)
    }
}

/// Renders a scalar for reports: exact values keep their fraction form.
pub fn render<S: Scalar>(v: &S) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        let q: Rational = parse_scalar("1/4").unwrap();
        assert_eq!(q, Rational::from_ratio(1, 4));
        let d: Rational = parse_scalar("0.25").unwrap();
        assert_eq!(d, q);
        let neg: Rational = parse_scalar("-2.5").unwrap();
        assert_eq!(neg, Rational::from_ratio(-5, 2));
        assert!(parse_scalar::<Rational>("1/0").is_none());
        assert!(parse_scalar::<f64>("abc").is_none());
    }

    #[test]
    fn huge_rationals_convert_to_f64() {
        let big = Rational::from_i64(3).pow(900) / Rational::from_i64(2).pow(1400);
        let v = big.as_f64();
        assert!(v.is_finite() && v > 0.0);
    }
}
