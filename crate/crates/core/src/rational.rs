//! Exact rational numbers.
//!
//! Item-centric weights are `1/(m·n)`; sums over merged bins can have
//! denominators far beyond 128 bits for large universes, so values are backed
//! by arbitrary-precision integers. On the wire a rational is
//! `{"num": .., "den": ..}`, each part a JSON integer when it fits in `i64`
//! and a decimal string otherwise.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_integer(value: u64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        Rational(BigRational::new(num, den))
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

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn to_f64(&self) -> f64 {
        // Scale down huge parts before dividing so the quotient stays finite.
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
            _ => {
                let shift = self.denom().bits().saturating_sub(900);
                let n = (self.numer() >> shift).to_f64().unwrap_or(f64::NAN);
                let d = (self.denom() >> shift).to_f64().unwrap_or(f64::NAN);
                n / d
            }
        }
    }

    /// Decimal expansion rounded half away from zero to `places` digits.
    pub fn to_decimal_string(&self, places: usize) -> String {
        let scale = BigInt::from(10u32).pow(places as u32);
        let scaled: BigInt = self.numer().abs() * &scale * 2 + self.denom();
        let (q, _) = scaled.div_rem(&(self.denom() * 2));
        let (int, frac) = q.div_rem(&scale);
        let sign = if self.0.is_negative() && !q.is_zero() { "-" } else { "" };
        if places == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac:0>places$}")
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl From<u64> for Rational {
    fn from(value: u64) -> Self {
        Rational::from_integer(value)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        Rational(&self.0 + &rhs.0)
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

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        Rational(self.0 / rhs.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        let mut acc = Rational::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntRepr {
    Small(i64),
    Big(String),
}

impl IntRepr {
    fn of(value: &BigInt) -> Self {
        match value.to_i64() {
            Some(v) => IntRepr::Small(v),
            None => IntRepr::Big(value.to_string()),
        }
    }

    fn into_big(self) -> Result<BigInt, String> {
        match self {
            IntRepr::Small(v) => Ok(BigInt::from(v)),
            IntRepr::Big(s) => s.parse().map_err(|_| format!("invalid integer {s:?}")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: IntRepr,
    den: IntRepr,
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RationalRepr {
            num: IntRepr::of(self.numer()),
            den: IntRepr::of(self.denom()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = RationalRepr::deserialize(deserializer)?;
        let num = repr.num.into_big().map_err(serde::de::Error::custom)?;
        let den = repr.den.into_big().map_err(serde::de::Error::custom)?;
        if den.is_zero() {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Rational::from_big(num, den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let r = Rational::new(2, 8);
        assert_eq!(r.numer(), &BigInt::from(1));
        assert_eq!(r.denom(), &BigInt::from(4));
        assert_eq!(Rational::new(1, -2), Rational::new(-1, 2));
        assert_eq!(r.to_string(), "1/4");
        assert_eq!(Rational::new(6, 3).to_string(), "2");
    }

    #[test]
    fn decimal_strings() {
        assert_eq!(Rational::new(1, 4).to_decimal_string(6), "0.250000");
        assert_eq!(Rational::new(2, 3).to_decimal_string(2), "0.67");
        assert_eq!(Rational::new(11, 6).to_decimal_string(2), "1.83");
        assert_eq!(Rational::new(-1, 3).to_decimal_string(3), "-0.333");
        assert_eq!(Rational::new(5, 2).to_decimal_string(0), "3");
    }

    #[test]
    fn wire_form() {
        let r = Rational::new(1, 4);
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"num":1,"den":4}"#);
        let huge = Rational::from_big(BigInt::from(1), BigInt::from(10u8).pow(40));
        let text = serde_json::to_string(&huge).unwrap();
        assert!(text.contains("\"den\":\"1000"));
        let back: Rational = serde_json::from_str(&text).unwrap();
        assert_eq!(back, huge);
        assert!((huge.to_f64() - 1e-40).abs() < 1e-50);
        assert!(serde_json::from_str::<Rational>(r#"{"num":1,"den":0}"#).is_err());
    }

    #[test]
    fn exact_sums() {
        let total: Rational = (1..=6).map(|d| Rational::new(1, d)).sum();
        assert_eq!(total, Rational::new(49, 20));
    }
}
