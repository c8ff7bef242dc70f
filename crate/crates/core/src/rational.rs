//! Exact rational values and their wire format.
//!
//! Rationals travel as `"p/q"` strings (always with an explicit denominator)
//! next to a lossy decimal rendering.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    Rational::new(num.into(), den.into())
}

pub fn int(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

pub fn half() -> Rational {
    ratio(1, 2)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `"p/q"` with `q > 0`, reduced.
pub fn format_exact(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `"p/q"` or a bare integer `"p"`.
pub fn parse_exact(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| Error::Parse(format!("bad rational numerator in {s:?}")))?;
    let den: BigInt = den.parse().map_err(|_| Error::Parse(format!("bad rational denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Serialized form of an exact rational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalValue {
    pub exact: String,
    pub decimal: f64,
}

impl From<&Rational> for RationalValue {
    fn from(r: &Rational) -> Self {
        RationalValue { exact: format_exact(r), decimal: to_f64(r) }
    }
}

impl RationalValue {
    pub fn value(&self) -> Result<Rational> {
        parse_exact(&self.exact)
    }
}

/// Serde adapter writing a `Rational` as a `RationalValue`.
pub mod serde_exact {
    use super::{Rational, RationalValue};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        RationalValue::from(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        RationalValue::deserialize(d)?.value().map_err(serde::de::Error::custom)
    }
}

pub(crate) fn factorial(k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=k {
        acc *= i;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_format_always_has_denominator() {
        assert_eq!(format_exact(&ratio(10, 8)), "5/4");
        assert_eq!(format_exact(&int(2)), "2/1");
        assert_eq!(format_exact(&ratio(-3, 6)), "-1/2");
    }

    #[test]
    fn parse_accepts_both_forms() {
        assert_eq!(parse_exact("5/4").unwrap(), ratio(5, 4));
        assert_eq!(parse_exact(" 7 ").unwrap(), int(7));
        assert!(parse_exact("1/0").is_err());
        assert!(parse_exact("x/2").is_err());
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), BigInt::one());
        assert_eq!(factorial(5), BigInt::from(120));
    }

    proptest::proptest! {
        #[test]
        fn wire_format_is_lossless(num in -10_000i64..10_000, den in 1i64..10_000) {
            let r = ratio(num, den);
            let v = RationalValue::from(&r);
            proptest::prop_assert_eq!(v.value().unwrap(), r);
        }
    }
}
