use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde_json::Value;

/// Coefficient ring for series: the integers or the rationals.
pub trait Coeff:
    Clone + PartialEq + fmt::Debug + fmt::Display + Zero + One + Signed + FromPrimitive + Send + Sync
{
    /// Multiplicative inverse when it exists in the coefficient ring.
    fn try_inv(&self) -> Option<Self>;
}

impl Coeff for BigInt {
    fn try_inv(&self) -> Option<Self> {
        if self.is_one() || (-self).is_one() {
            Some(self.clone())
        } else {
            None
        }
    }
}

impl Coeff for BigRational {
    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
}

/// JSON rendering of coefficients: integers as numbers when they fit in
/// `i64`, rationals as `"p/q"` strings.
pub trait CoeffJson: Sized {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Option<Self>;
}

impl CoeffJson for BigInt {
    fn to_json(&self) -> Value {
        match self.to_i64() {
            Some(x) => Value::from(x),
            None => Value::String(self.to_string()),
        }
    }

    fn from_json(v: &Value) -> Option<Self> {
        match v {
            Value::Number(n) => n.as_i64().map(BigInt::from),
            Value::String(s) => s.parse().ok(),
            _ => None,
        }
    }
}

impl CoeffJson for BigRational {
    fn to_json(&self) -> Value {
        if self.denom().is_one() {
            self.numer().to_json()
        } else {
            Value::String(format!("{}/{}", self.numer(), self.denom()))
        }
    }

    fn from_json(v: &Value) -> Option<Self> {
        match v {
            Value::Number(n) => n.as_i64().map(|x| BigRational::from_integer(x.into())),
            Value::String(s) => parse_coeff(s),
            _ => None,
        }
    }
}

/// Parses `"p"` or `"p/q"` into a reduced rational.
pub fn parse_coeff(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            let g = n.gcd(&d);
            Some(BigRational::new(n / &g, d / g))
        }
    }
}
