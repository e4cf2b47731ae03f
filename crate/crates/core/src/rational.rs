//! Probabilities that stay exact when their inputs are rational.
//!
//! Channel and pmf files carry entries as decimal strings (`"0.1"`),
//! rational strings (`"3/7"`) or plain JSON numbers. The first two parse
//! to exact rationals; JSON numbers are kept as floats.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Absolute tolerance used when float row sums are checked against 1.
pub const FLOAT_SUM_TOL: f64 = 1e-12;

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact conversion of a finite float into a rational.
pub fn rat_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(|| panic!("non-finite value {x}"))
}

pub fn rat_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for the direct path
        let n = x.numer().bits() as i64;
        let d = x.denom().bits() as i64;
        let shift = (n - d - 60).max(0) as usize;
        let scaled = x / BigRational::from_integer(BigInt::one() << shift);
        scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
    })
}

/// Renders `n/d`, or `n` when the denominator is 1.
pub fn rat_to_string(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `"n/d"`, an integer, or a decimal with optional exponent, exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidProbability(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

/// A probability (or any table entry) stored exactly when possible.
#[derive(Clone, Debug, PartialEq)]
pub enum Prob {
    Exact(BigRational),
    Float(f64),
}

impl Prob {
    pub fn zero() -> Self {
        Prob::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Prob::Exact(BigRational::one())
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Prob::Exact(rat(num, den))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Prob::Exact(r) => rat_to_f64(r),
            Prob::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Prob::Exact(r) => Some(r),
            Prob::Float(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Prob::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Prob::Exact(r) => r.is_zero(),
            Prob::Float(x) => *x == 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Prob::Exact(r) => r.is_negative(),
            Prob::Float(x) => *x < 0.0,
        }
    }

    /// Multiplies two entries; the result is exact only if both are.
    pub fn mul(&self, other: &Prob) -> Prob {
        match (self, other) {
            (Prob::Exact(a), Prob::Exact(b)) => Prob::Exact(a * b),
            _ => Prob::Float(self.to_f64() * other.to_f64()),
        }
    }

    pub fn sub(&self, other: &Prob) -> Prob {
        match (self, other) {
            (Prob::Exact(a), Prob::Exact(b)) => Prob::Exact(a - b),
            _ => Prob::Float(self.to_f64() - other.to_f64()),
        }
    }

    pub fn div_int(&self, d: i64) -> Prob {
        match self {
            Prob::Exact(a) => Prob::Exact(a / BigRational::from_integer(BigInt::from(d))),
            Prob::Float(x) => Prob::Float(x / d as f64),
        }
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prob::Exact(r) => f.write_str(&rat_to_string(r)),
            Prob::Float(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Prob {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_rational(s).map(Prob::Exact)
    }
}

/// Sum of a row of entries: exact if every entry is.
pub fn sum_probs<'a>(row: impl IntoIterator<Item = &'a Prob>) -> Prob {
    let mut exact = Some(BigRational::zero());
    let mut float = 0.0;
    for p in row {
        float += p.to_f64();
        match (&mut exact, p) {
            (Some(acc), Prob::Exact(r)) => *acc += r,
            _ => exact = None,
        }
    }
    match exact {
        Some(r) => Prob::Exact(r),
        None => Prob::Float(float),
    }
}

/// True when the row sums to one: exactly for rational rows, within
/// [`FLOAT_SUM_TOL`] otherwise.
pub fn sums_to_one(sum: &Prob) -> bool {
    match sum {
        Prob::Exact(r) => r.is_one(),
        Prob::Float(x) => (x - 1.0).abs() <= FLOAT_SUM_TOL,
    }
}

impl Serialize for Prob {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Prob::Exact(r) => serializer.serialize_str(&rat_to_string(r)),
            Prob::Float(x) => serializer.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Prob {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ProbVisitor;
        impl Visitor<'_> for ProbVisitor {
            type Value = Prob;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, a decimal string, or a \"num/den\" string")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Prob, E> {
                v.parse().map_err(|_| E::custom(format!("invalid probability `{v}`")))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Prob, E> {
                Ok(Prob::Float(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Prob, E> {
                Ok(Prob::Exact(BigRational::from_integer(BigInt::from(v))))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Prob, E> {
                Ok(Prob::Exact(BigRational::from_integer(BigInt::from(v))))
            }
        }
        deserializer.deserialize_any(ProbVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("0.1").unwrap(), rat(1, 10));
        assert_eq!(parse_rational("-2.50").unwrap(), rat(-5, 2));
        assert_eq!(parse_rational("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn float_row_sums_use_tolerance() {
        let row = [Prob::Float(0.1), Prob::Float(0.2), Prob::Float(0.7)];
        assert!(sums_to_one(&sum_probs(&row)));
        let row = [Prob::ratio(1, 3), Prob::ratio(2, 3)];
        assert_eq!(sum_probs(&row), Prob::one());
    }

    #[test]
    fn serde_keeps_rationals() {
        let p: Vec<Prob> = serde_json::from_str(r#"["0.1", "2/3", 0.25, 1]"#).unwrap();
        assert_eq!(p[0], Prob::ratio(1, 10));
        assert_eq!(p[2], Prob::Float(0.25));
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"["1/10","2/3",0.25,"1"]"#);
    }

    #[test]
    fn large_rationals_convert_to_float() {
        let big = BigRational::new(BigInt::one() << 2000, (BigInt::one() << 2000) * 3);
        assert!((rat_to_f64(&big) - 1.0 / 3.0).abs() < 1e-15);
    }
}
