//! Exact rational helpers and the scalar abstraction shared by the float and
//! exact-rational code paths.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type ComplexRational = Complex<BigRational>;

/// Field of coefficients used by Fourier-coefficient arithmetic.
///
/// Implemented for `Complex64` (fast path) and `Complex<BigRational>` (exact mode).
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn from_rational(r: &Rational) -> Self;
    fn from_complex_rational(c: &ComplexRational) -> Self;
    fn conj(&self) -> Self;
    fn to_c64(&self) -> Complex64;
}

impl Coeff for Complex64 {
    fn from_rational(r: &Rational) -> Self {
        Complex64::new(rational_to_f64(r), 0.0)
    }
    fn from_complex_rational(c: &ComplexRational) -> Self {
        Complex64::new(rational_to_f64(&c.re), rational_to_f64(&c.im))
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

impl Coeff for ComplexRational {
    fn from_rational(r: &Rational) -> Self {
        Complex::new(r.clone(), Rational::zero())
    }
    fn from_complex_rational(c: &ComplexRational) -> Self {
        c.clone()
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    match r.to_f64() {
        Some(v) => v,
        None => {
            // numerator/denominator too large for f64 individually
            let n = r.numer().bits() as i64;
            let d = r.denom().bits() as i64;
            let shift = (n - d).clamp(-1000, 1000);
            let scaled = if shift >= 0 {
                r / Rational::from_integer(BigInt::one() << shift as usize)
            } else {
                r * Rational::from_integer(BigInt::one() << (-shift) as usize)
            };
            scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
        }
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, an integer, or a decimal string such as `"-0.125"` or
/// `"1.5e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        let q = BigInt::from_str(q.trim()).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("{s:?}: zero denominator")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..]
                .parse()
                .map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("{s:?}: no digits")));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(format!("{s:?}: not a number")));
    }
    let all = format!("{int_part}{frac_part}");
    let mut num = BigInt::from_str(if all.is_empty() { "0" } else { &all })
        .map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
    if neg {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Accepts a JSON string (decimal or `p/q`) or a JSON number.
pub fn rational_from_json(v: &serde_json::Value) -> Result<Rational> {
    match v {
        serde_json::Value::String(s) => parse_rational(s),
        serde_json::Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(Error::Parse(format!("expected a number or string, got {other}"))),
    }
}

/// Renders `p/q` (or `p` for integers).
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
