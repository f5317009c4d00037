//! Scalar fields used by dual elements: exact rationals for algebraic
//! identities and `f64` for path-valued numerics.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact scalar used throughout the Hopf-algebra layer.
pub type Rational = BigRational;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    const EXACT: bool;

    fn from_i64(value: i64) -> Self;
    fn from_rational(value: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }
    /// Text form used in JSON serialization: `p/q` or a decimal.
    fn to_text(&self) -> String;
    fn parse_text(text: &str) -> Result<Self>;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Equality for exact scalars; relative closeness
    /// `|a − b| ≤ tol·max(1, |a|, |b|)` for floats.
    fn close(&self, other: &Self, tol: f64) -> bool;

    /// `self^e`, or `None` when the power is not representable
    /// (fractional exponents of exact scalars).
    fn pow_rational(&self, e: Rational64) -> Option<Self>;
}

fn integer_power<S: Scalar>(base: &S, e: Rational64) -> Option<S> {
    if *e.denom() != 1 || *e.numer() < 0 {
        return None;
    }
    let mut acc = S::one();
    for _ in 0..*e.numer() {
        acc = acc * base.clone();
    }
    Some(acc)
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(value: i64) -> Self {
        value as f64
    }

    fn from_rational(value: &Rational) -> Self {
        rational_to_f64(value)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_text(&self) -> String {
        // Shortest representation that round-trips.
        format!("{self:?}")
    }

    fn parse_text(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.contains('/') {
            return parse_rational(t).map(|r| rational_to_f64(&r));
        }
        t.parse::<f64>().map_err(|e| Error::Parse {
            position: 0,
            message: format!("invalid float {t:?}: {e}"),
        })
    }

    fn close(&self, other: &Self, tol: f64) -> bool {
        let scale = 1f64.max(self.abs()).max(other.abs());
        (self - other).abs() <= tol * scale
    }

    fn pow_rational(&self, e: Rational64) -> Option<Self> {
        if *e.denom() == 1 {
            integer_power(self, e)
        } else {
            Some(self.powf(small_to_f64(e)))
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(value: i64) -> Self {
        Rational::from_integer(BigInt::from(value))
    }

    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn abs_f64(&self) -> f64 {
        rational_to_f64(&self.abs())
    }

    fn to_text(&self) -> String {
        format_rational(self)
    }

    fn parse_text(text: &str) -> Result<Self> {
        parse_rational(text)
    }

    fn close(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn pow_rational(&self, e: Rational64) -> Option<Self> {
        integer_power(self, e)
    }
}

pub fn rational_to_f64(value: &Rational) -> f64 {
    match (value.numer().to_f64(), value.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Very large numerator/denominator: scale down before dividing.
            let shift = value.numer().bits().max(value.denom().bits()).saturating_sub(1000);
            let n = (value.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (value.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Formats as `p/q`, or `p` when the denominator is one.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Parses `p/q` or an integer.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = |message: String| Error::Parse { position: 0, message };
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| bad(format!("invalid rational numerator in {t:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| bad(format!("invalid rational denominator in {t:?}")))?;
    if den.is_zero() {
        return Err(bad(format!("zero denominator in {t:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Parses a small rational (Hölder exponents and similar configuration values).
pub fn parse_small_rational(text: &str) -> Result<Rational64> {
    let r = parse_rational(text)?;
    match (r.numer().to_i64(), r.denom().to_i64()) {
        (Some(n), Some(d)) => Ok(Rational64::new(n, d)),
        _ => Err(Error::Parse {
            position: 0,
            message: format!("rational {text:?} does not fit in 64 bits"),
        }),
    }
}

pub fn small_to_f64(value: Rational64) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

pub fn format_small(value: Rational64) -> String {
    if *value.denom() == 1 {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}
