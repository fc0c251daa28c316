//! Scalar rings used for coordinates and coefficients.
//!
//! Group points and algebra vectors are usually exact rationals, but the
//! same group law is also evaluated over polynomials (symbolic blow-ups,
//! realization of vector fields) and over `f64` (Monte Carlo membership
//! tests). Everything generic in this crate is written against [`Ring`].

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational.
pub type Rational = BigRational;

/// A commutative ring containing the rationals.
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn rzero() -> Self;
    fn rone() -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn is_rzero(&self) -> bool;
    fn radd(&self, other: &Self) -> Self;
    fn rsub(&self, other: &Self) -> Self;
    fn rmul(&self, other: &Self) -> Self;
    fn rneg(&self) -> Self;

    /// Multiplication by a rational constant.
    fn scale(&self, q: &Rational) -> Self {
        self.rmul(&Self::from_rational(q))
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = Self::rone();
        for _ in 0..e {
            acc = acc.rmul(self);
        }
        acc
    }
}

impl Ring for Rational {
    fn rzero() -> Self {
        Zero::zero()
    }
    fn rone() -> Self {
        One::one()
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn is_rzero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn radd(&self, other: &Self) -> Self {
        self + other
    }
    fn rsub(&self, other: &Self) -> Self {
        self - other
    }
    fn rmul(&self, other: &Self) -> Self {
        self * other
    }
    fn rneg(&self) -> Self {
        -self
    }
    fn scale(&self, q: &Rational) -> Self {
        self * q
    }
}

impl Ring for f64 {
    fn rzero() -> Self {
        0.0
    }
    fn rone() -> Self {
        1.0
    }
    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }
    fn is_rzero(&self) -> bool {
        *self == 0.0
    }
    fn radd(&self, other: &Self) -> Self {
        self + other
    }
    fn rsub(&self, other: &Self) -> Self {
        self - other
    }
    fn rmul(&self, other: &Self) -> Self {
        self * other
    }
    fn rneg(&self) -> Self {
        -self
    }
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // numerator/denominator overflow f64 individually
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Closest rational with a power-of-two denominator (exact for finite doubles
/// up to the chosen precision).
pub fn f64_to_rational(x: f64, bits: u32) -> Rational {
    let scale = (1u64 << bits) as f64;
    let n = (x * scale).round();
    Rational::new(BigInt::from(n as i128), BigInt::from(1u64 << bits))
}

/// Parses `p/q`, `p` or a plain decimal such as `0.25`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| Error::Parse(format!("bad rational `{t}`")))?;
        let q = BigInt::from_str(q.trim()).map_err(|_| Error::Parse(format!("bad rational `{t}`")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{t}`")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let neg = whole.trim_start().starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
            .map_err(|_| Error::Parse(format!("bad rational `{t}`")))?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let q = Rational::new(n, d);
        return Ok(if neg { -q } else { q });
    }
    let n = BigInt::from_str(t).map_err(|_| Error::Parse(format!("bad rational `{t}`")))?;
    Ok(Rational::from_integer(n))
}

/// Comma separated list of rationals, e.g. `1,-1/2,0`.
pub fn parse_rational_list(text: &str) -> Result<Vec<Rational>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(parse_rational).collect()
}

pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

pub fn format_rational_list(qs: &[Rational]) -> String {
    qs.iter().map(format_rational).collect::<Vec<_>>().join(",")
}

pub fn factorial(n: u32) -> Rational {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Rational::from_integer(acc)
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}
