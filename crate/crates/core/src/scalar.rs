//! Real numbers that remember whether they are exact.
//!
//! Config files may supply atom sizes and rates as decimal or `p/q` strings.
//! Those are kept as exact rationals alongside their `f64` value so that
//! lattice detection and the oracle's linear solve can run without rounding.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {input:?} as a number: {reason}")]
pub struct ParseScalarError {
    pub input: String,
    pub reason: &'static str,
}

/// A real value, optionally backed by an exact rational.
#[derive(Clone, Debug)]
pub struct Scalar {
    value: f64,
    exact: Option<BigRational>,
}

impl Scalar {
    /// An inexact value.
    pub fn from_f64(value: f64) -> Self {
        Self { value, exact: None }
    }

    pub fn from_rational(r: BigRational) -> Self {
        let value = rational_to_f64(&r);
        Self { value, exact: Some(r) }
    }

    pub fn integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact `num / den`. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    /// Parses `"p/q"`, or a decimal literal with optional exponent. Both are
    /// stored exactly.
    pub fn parse(input: &str) -> Result<Self, ParseScalarError> {
        let s = input.trim();
        let err = |reason| ParseScalarError {
            input: input.to_string(),
            reason,
        };
        if s.is_empty() {
            return Err(err("empty"));
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| err("bad numerator"))?;
            let q: BigInt = q.trim().parse().map_err(|_| err("bad denominator"))?;
            if q.is_zero() {
                return Err(err("zero denominator"));
            }
            return Ok(Self::from_rational(BigRational::new(p, q)));
        }
        parse_decimal(s).map(Self::from_rational).ok_or_else(|| err("not a decimal or p/q literal"))
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// The exact rational if known, else the exact binary expansion of the
    /// float. `None` only for non-finite values.
    pub fn to_rational_lossless(&self) -> Option<BigRational> {
        match &self.exact {
            Some(r) => Some(r.clone()),
            None => BigRational::from_float(self.value),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some(r) => r.is_zero(),
            None => self.value == 0.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        match &self.exact {
            Some(r) => r.is_positive(),
            None => self.value > 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.exact {
            Some(r) => r.is_negative(),
            None => self.value < 0.0,
        }
    }

    pub fn abs(&self) -> Self {
        match &self.exact {
            Some(r) => Self::from_rational(r.abs()),
            None => Self::from_f64(self.value.abs()),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Self::from_rational(a + b),
            _ => Self::from_f64(self.value + other.value),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Self::from_rational(a - b),
            _ => Self::from_f64(self.value - other.value),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Self::from_rational(a * b),
            _ => Self::from_f64(self.value * other.value),
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => self.value == other.value,
        }
    }
}

impl From<f64> for Scalar {
    fn from(value: f64) -> Self {
        Self::from_f64(value)
    }
}

impl From<i64> for Scalar {
    fn from(value: i64) -> Self {
        Self::integer(value)
    }
}

impl FromStr for Scalar {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Some(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            None => write!(f, "{}", self.value),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Number(serde_json::Number),
        }
        let text = match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s,
            // serde_json prints the shortest round-trip form, which is the
            // literal the user typed for ordinary decimals.
            Repr::Number(n) => n.to_string(),
        };
        Scalar::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Correctly rounded conversion; falls back to a numerator/denominator
/// division for huge operands.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Largest positive rational `g` with every input an integer multiple of `g`.
pub fn rational_gcd<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> Option<BigRational> {
    let mut acc: Option<BigRational> = None;
    for v in values {
        let v = v.abs();
        if v.is_zero() {
            continue;
        }
        acc = Some(match acc {
            None => v,
            Some(a) => {
                // gcd(p/q, r/s) = gcd(p*s, r*q) / (q*s)
                let num = (a.numer() * v.denom()).gcd(&(v.numer() * a.denom()));
                BigRational::new(num, a.denom() * v.denom())
            }
        });
    }
    acc
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all.parse::<BigInt>().ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let factor = num_traits::pow::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    if negative {
        value = -value;
    }
    Some(value)
}

pub(crate) fn rational_is_integer(r: &BigRational) -> bool {
    r.denom().is_one()
}
