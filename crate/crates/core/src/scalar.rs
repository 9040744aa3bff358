//! Numeric backends.
//!
//! Every kernel in this crate is generic over [`Scalar`]. Two families are
//! provided: binary floating point (`f64`, `f32`) and exact rationals
//! ([`Rational`], an arbitrary-precision `BigRational`). Exact mode is closed
//! under the four field operations, which makes it usable as an oracle for the
//! closed-form identities the float path relies on.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision exact rational.
pub type Rational = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Float,
    Rational,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Float => f.write_str("float"),
            Mode::Rational => f.write_str("rational"),
        }
    }
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialOrd
    + Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    const MODE: Mode;

    /// `num / den`, exact in rational mode.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Converts a finite float. Non-finite input is rejected in every mode.
    fn try_from_f64(v: f64) -> Result<Self>;

    /// Nearest `f64`; lossy for rationals.
    fn to_f64_lossy(&self) -> f64;

    /// Parses `a/b`, a decimal such as `0.95`, or scientific notation.
    /// Rational mode reads decimals exactly (`0.95` is `19/20`).
    fn parse_decimal(s: &str) -> Result<Self>;

    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize fits every scalar backend")
    }

    fn powu(&self, e: usize) -> Self {
        num_traits::pow(self.clone(), e)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

fn split_ratio(s: &str) -> Option<(&str, &str)> {
    let (a, b) = s.split_once('/')?;
    Some((a.trim(), b.trim()))
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const MODE: Mode = Mode::Float;

            fn from_ratio(num: i64, den: i64) -> Self {
                (num as $t) / (den as $t)
            }

            fn try_from_f64(v: f64) -> Result<Self> {
                if v.is_finite() {
                    Ok(v as $t)
                } else {
                    Err(Error::Domain(format!("non-finite value {v}")))
                }
            }

            fn to_f64_lossy(&self) -> f64 {
                *self as f64
            }

            fn parse_decimal(s: &str) -> Result<Self> {
                let s = s.trim();
                let parse = |t: &str| {
                    t.parse::<$t>()
                        .map_err(|e| Error::Parse(format!("{t:?}: {e}")))
                };
                let v = match split_ratio(s) {
                    Some((a, b)) => parse(a)? / parse(b)?,
                    None => parse(s)?,
                };
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse(format!("{s:?} is not a finite number")))
                }
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

impl Scalar for Rational {
    const MODE: Mode = Mode::Rational;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn try_from_f64(v: f64) -> Result<Self> {
        BigRational::from_float(v)
            .ok_or_else(|| Error::Domain(format!("non-finite value {v} has no rational form")))
    }

    fn to_f64_lossy(&self) -> f64 {
        if let Some(v) = self.to_f64() {
            if v.is_finite() {
                return v;
            }
        }
        // Numerator or denominator too wide for f64: scale both down first.
        let shift = self
            .numer()
            .bits()
            .max(self.denom().bits())
            .saturating_sub(1000);
        let n = (self.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (self.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    }

    fn parse_decimal(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = split_ratio(s) {
            let num = parse_exact_decimal(a)?;
            let den = parse_exact_decimal(b)?;
            if den.is_zero() {
                return Err(Error::Parse(format!("{s:?}: zero denominator")));
            }
            return Ok(num / den);
        }
        parse_exact_decimal(s)
    }
}

/// `[+-]digits[.digits][(e|E)[+-]digits]` read without rounding.
fn parse_exact_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("{s:?} is not a decimal number"));
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::parse_bytes(all_digits.as_bytes(), 10).ok_or_else(bad)?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// `|a - b| / max(|a|, |b|)`, with `0` when both vanish.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub(crate) fn two<T: Scalar>() -> T {
    T::one() + T::one()
}

pub(crate) fn check_unit_interval<T: Scalar>(x: &T, what: &str) -> Result<()> {
    if *x < T::zero() || *x > T::one() {
        Err(Error::domain(format!("{what} = {x} is outside [0,1]")))
    } else {
        Ok(())
    }
}
