//! Exact rational numbers.
//!
//! Every cost, gap and series value in this crate is a [`Rational`]. The
//! textual form is `p/q` with `q > 0` and `gcd(p, q) = 1`; integers are
//! written without the denominator.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_int(v: i64) -> Self {
        Rational(BigRational::from_integer(v.into()))
    }

    pub fn from_bigint(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        Rational(BigRational::new(numer, denom))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn square(&self) -> Self {
        Rational(&self.0 * &self.0)
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    /// Smallest integer `>= self`.
    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// `ceil(self)` as a machine integer, if it fits.
    pub fn ceil_u64(&self) -> Option<u64> {
        self.ceil().to_u64()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering rounded half away from zero to `places` digits.
    /// Only for display; comparisons always use the exact value.
    pub fn to_decimal(&self, places: usize) -> String {
        let scale = BigInt::from(10u32).pow(places as u32);
        let numer = self.0.numer().abs() * &scale;
        let denom = self.0.denom();
        let (q, r) = numer.div_rem(denom);
        let q = if &r * 2u32 >= *denom { q + 1u32 } else { q };
        let digits = q.to_string();
        let digits = if digits.len() <= places {
            format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int_part, frac_part) = digits.split_at(digits.len() - places);
        let sign = if self.0.is_negative() && q_nonzero(&digits) { "-" } else { "" };
        if places == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }

    pub fn min_of<'a, I: IntoIterator<Item = &'a Rational>>(it: I) -> Option<Rational> {
        it.into_iter().min().cloned()
    }

    pub fn max_of<'a, I: IntoIterator<Item = &'a Rational>>(it: I) -> Option<Rational> {
        it.into_iter().max().cloned()
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

fn q_nonzero(digits: &str) -> bool {
    digits.bytes().any(|b| b != b'0')
}

impl From<i32> for Rational {
    fn from(v: i32) -> Self {
        Rational::from_int(v.into())
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_int(v)
    }
}

impl From<usize> for Rational {
    fn from(v: usize) -> Self {
        Rational(BigRational::from_integer(BigInt::from(v)))
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational(BigRational::from_integer(v))
    }
}

impl From<BigRational> for Rational {
    fn from(v: BigRational) -> Self {
        Rational(v)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational {input:?}: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| ParseRationalError {
            input: s.to_string(),
            reason,
        };
        let t = s.trim();
        if t.is_empty() {
            return Err(err("empty"));
        }
        let parse_int = |p: &str| -> Result<BigInt, ParseRationalError> {
            let p = p.trim();
            let (neg, digits) = match p.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, p.strip_prefix('+').unwrap_or(p)),
            };
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err("expected integer digits"));
            }
            let v = BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(|| err("bad digits"))?;
            Ok(if neg { -v } else { v })
        };
        match t.split_once('/') {
            None => Ok(Rational::from(parse_int(t)?)),
            Some((p, q)) => {
                let p = parse_int(p)?;
                let q = parse_int(q)?;
                if q.is_zero() {
                    return Err(err("zero denominator"));
                }
                if q.sign() == Sign::Minus {
                    return Err(err("denominator must be positive"));
                }
                Ok(Rational::from_bigint(p, q))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RationalVisitor;

        impl Visitor<'_> for RationalVisitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational as \"p/q\" or an integer")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(Rational::from_int(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(Rational::from(BigInt::from(v)))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
                Err(E::custom(format!(
                    "floating point value {v} is not exact; write it as \"p/q\""
                )))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(RationalVisitor)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0 $op &rhs.0)
            }
        }
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(&self.0 $op &rhs.0)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(&self.0 $op rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);
forward_binop!(Div, div, /);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Shorthand for `Rational::new(p, q)`.
pub fn q(p: i64, q: i64) -> Rational {
    Rational::new(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        assert_eq!(q(2, 4).to_string(), "1/2");
        assert_eq!(q(-6, 3).to_string(), "-2");
        assert_eq!(q(3, -9).to_string(), "-1/3");
        assert_eq!("10/4".parse::<Rational>().unwrap(), q(5, 2));
        assert_eq!("-7".parse::<Rational>().unwrap(), q(-7, 1));
    }

    #[test]
    fn rejects_bad_input() {
        for bad in ["", "1/0", "a/2", "1.5", "1/-2", "/3", "3/"] {
            assert!(bad.parse::<Rational>().is_err(), "{bad}");
        }
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(q(4, 3).to_decimal(6), "1.333333");
        assert_eq!(q(2, 3).to_decimal(6), "0.666667");
        assert_eq!(q(-1, 8).to_decimal(2), "-0.13");
        assert_eq!(q(161, 12).to_decimal(6), "13.416667");
        assert_eq!(q(-1, 10_000_000).to_decimal(3), "0.000");
        assert_eq!(q(7, 1).to_decimal(0), "7");
    }

    #[test]
    fn serde_accepts_integers_and_strings() {
        let v: Vec<Rational> = serde_json::from_str(r#"[1, "4/3", "-2/6"]"#).unwrap();
        assert_eq!(v, vec![q(1, 1), q(4, 3), q(-1, 3)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["1","4/3","-1/3"]"#);
        assert!(serde_json::from_str::<Rational>("0.5").is_err());
    }

    #[test]
    fn ceil_floor() {
        assert_eq!(q(7, 2).ceil(), BigInt::from(4));
        assert_eq!(q(-7, 2).ceil(), BigInt::from(-3));
        assert_eq!(q(8, 2).ceil(), BigInt::from(4));
        assert_eq!(q(7, 2).floor(), BigInt::from(3));
    }
}
