use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::coeff::{Coeff, CoeffJson};
use super::truncated::TruncatedSeries;
use super::RingError;

/// Truncated Laurent series `t^valuation * body`.
///
/// A nonzero element has `body.coeffs()[0] != 0`; the body order is the
/// number of known coefficients (relative precision). Zero is exact and
/// stored as valuation 0 with an empty body.
#[derive(Clone, PartialEq, Debug)]
pub struct Laurent<C> {
    valuation: i64,
    body: TruncatedSeries<C>,
}

/// Element of `Z((t))`.
pub type NovikovSeries = Laurent<BigInt>;
/// Element of `Q((t))`.
pub type RationalLaurent = Laurent<BigRational>;

impl<C: Coeff> Laurent<C> {
    pub fn zero() -> Self {
        Self { valuation: 0, body: TruncatedSeries::new(Vec::new()) }
    }

    pub fn one(order: usize) -> Self {
        Self::monomial(C::one(), 0, order)
    }

    /// `c t^k` known to relative order `order`.
    pub fn monomial(c: C, k: i64, order: usize) -> Self {
        if c.is_zero() || order == 0 {
            return Self::zero();
        }
        Self { valuation: k, body: TruncatedSeries::monomial(c, 0, order) }
    }

    /// `sum coeffs[i] t^(start+i)` known up to (excluding) `t^(start+coeffs.len())`.
    /// Leading zeros are stripped and cost relative precision; an all-zero
    /// window yields the exact zero.
    pub fn from_window(start: i64, coeffs: Vec<C>) -> Self {
        match coeffs.iter().position(|c| !c.is_zero()) {
            None => Self::zero(),
            Some(lead) => Self {
                valuation: start + lead as i64,
                body: TruncatedSeries::new(coeffs[lead..].to_vec()),
            },
        }
    }

    /// Power series `s` (constant term at `t^0`).
    pub fn from_series(s: &TruncatedSeries<C>) -> Self {
        Self::from_window(0, s.coeffs().to_vec())
    }

    /// Exact sparse Laurent polynomial truncated at absolute degree `abs_order`.
    pub fn from_terms(terms: &[(i64, C)], abs_order: i64) -> Self {
        let lo = terms.iter().filter(|(_, c)| !c.is_zero()).map(|(k, _)| *k).min();
        let Some(lo) = lo else { return Self::zero() };
        if lo >= abs_order {
            return Self::zero();
        }
        let mut coeffs = vec![C::zero(); (abs_order - lo) as usize];
        for (k, c) in terms {
            if (lo..abs_order).contains(k) {
                let i = (*k - lo) as usize;
                coeffs[i] = coeffs[i].clone() + c.clone();
            }
        }
        Self::from_window(lo, coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.body.order() == 0
    }

    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    pub fn body(&self) -> &TruncatedSeries<C> {
        &self.body
    }

    /// Relative precision (number of known body coefficients).
    pub fn order(&self) -> usize {
        self.body.order()
    }

    /// First unknown exponent, `None` for the exact zero.
    pub fn abs_precision(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.valuation + self.order() as i64)
        }
    }

    pub fn leading_coeff(&self) -> Option<&C> {
        self.body.coeff(0)
    }

    /// Coefficient of `t^k`; `None` when `k` is beyond the known window.
    pub fn coeff(&self, k: i64) -> Option<C> {
        if self.is_zero() || k < self.valuation {
            return Some(C::zero());
        }
        self.body.coeff((k - self.valuation) as usize).cloned()
    }

    /// Coefficients of `t^lo .. t^(hi-1)`, unknown ones reported as zero.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<C> {
        (lo..hi).map(|k| self.coeff(k).unwrap_or_else(C::zero)).collect()
    }

    pub fn is_unit(&self) -> bool {
        self.leading_coeff().and_then(|c| c.try_inv()).is_some()
    }

    /// Forgets every coefficient at or above `t^abs_order`.
    pub fn truncate_abs(&self, abs_order: i64) -> Self {
        if self.is_zero() || self.valuation >= abs_order {
            return Self::zero();
        }
        let keep = ((abs_order - self.valuation) as usize).min(self.order());
        Self { valuation: self.valuation, body: self.body.truncate(keep) }
    }

    /// Multiplication by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self { valuation: self.valuation + k, body: self.body.clone() }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() || self.is_zero() {
            return Self::zero();
        }
        Self { valuation: self.valuation, body: self.body.scale(c) }
    }

    /// Sum with explicit precision bookkeeping: the result is known up to
    /// the smaller absolute precision of the operands.
    pub fn checked_add(&self, rhs: &Self) -> Result<Self, RingError> {
        if self.is_zero() {
            return Ok(rhs.clone());
        }
        if rhs.is_zero() {
            return Ok(self.clone());
        }
        let end = self.abs_precision().unwrap().min(rhs.abs_precision().unwrap());
        let start = self.valuation.min(rhs.valuation);
        let coeffs: Vec<C> = (start..end)
            .map(|k| self.coeff(k).unwrap() + rhs.coeff(k).unwrap())
            .collect();
        let out = Self::from_window(start, coeffs);
        if out.is_zero() {
            Err(RingError::PrecisionUnderflow)
        } else {
            Ok(out)
        }
    }

    /// Two-sided inverse; the leading coefficient must be a unit of `C`.
    pub fn inverse(&self) -> Result<Self, RingError> {
        let lead = self.leading_coeff().ok_or_else(|| RingError::NotAUnit("0".into()))?;
        if lead.try_inv().is_none() {
            return Err(RingError::NotAUnit(lead.to_string()));
        }
        Ok(Self { valuation: -self.valuation, body: self.body.inverse()? })
    }

    /// Agreement of all coefficients strictly below `t^abs_order`.
    /// Coefficients unknown on either side count as disagreement.
    pub fn agrees_to(&self, other: &Self, abs_order: i64) -> bool {
        let lo = [self, other]
            .iter()
            .filter(|s| !s.is_zero())
            .map(|s| s.valuation)
            .min()
            .unwrap_or(abs_order);
        (lo..abs_order).all(|k| match (self.coeff(k), other.coeff(k)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        })
    }

    /// Zero modulo `t^abs_order`.
    pub fn vanishes_to(&self, abs_order: i64) -> bool {
        self.is_zero() || self.valuation >= abs_order
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Laurent<D> {
        Laurent::from_window(self.valuation, self.body.coeffs().iter().map(f).collect())
    }
}

impl NovikovSeries {
    pub fn to_rational(&self) -> RationalLaurent {
        self.map(|c| BigRational::from_integer(c.clone()))
    }

    pub fn from_i64_terms(terms: &[(i64, i64)], abs_order: i64) -> Self {
        let t: Vec<_> = terms.iter().map(|(k, c)| (*k, BigInt::from(*c))).collect();
        Self::from_terms(&t, abs_order)
    }
}

impl RationalLaurent {
    /// Integer series when every known coefficient is integral.
    pub fn to_integer(&self) -> Option<NovikovSeries> {
        if self.body.coeffs().iter().any(|c| !c.is_integer()) {
            return None;
        }
        Some(self.map(|c| c.to_integer()))
    }
}

impl<C: Coeff> Add for &Laurent<C> {
    type Output = Laurent<C>;
    /// Total cancellation inside the known window gives the exact zero;
    /// use [`Laurent::checked_add`] to detect it.
    fn add(self, rhs: Self) -> Laurent<C> {
        self.checked_add(rhs).unwrap_or_else(|_| Laurent::zero())
    }
}

impl<C: Coeff> Neg for &Laurent<C> {
    type Output = Laurent<C>;
    fn neg(self) -> Laurent<C> {
        Laurent { valuation: self.valuation, body: -&self.body }
    }
}

impl<C: Coeff> Sub for &Laurent<C> {
    type Output = Laurent<C>;
    fn sub(self, rhs: Self) -> Laurent<C> {
        self + &(-rhs)
    }
}

impl<C: Coeff> Mul for &Laurent<C> {
    type Output = Laurent<C>;
    fn mul(self, rhs: Self) -> Laurent<C> {
        if self.is_zero() || rhs.is_zero() {
            return Laurent::zero();
        }
        let body = &self.body * &rhs.body;
        // leading coefficient nonzero: product of nonzero leads in a domain
        Laurent { valuation: self.valuation + rhs.valuation, body }
    }
}

impl Div for &RationalLaurent {
    type Output = RationalLaurent;
    fn div(self, rhs: Self) -> RationalLaurent {
        self * &rhs.inverse().expect("division by zero in Q((t))")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<C: Coeff> $tr for Laurent<C> {
            type Output = Laurent<C>;
            fn $m(self, rhs: Self) -> Laurent<C> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<C: Coeff> Neg for Laurent<C> {
    type Output = Laurent<C>;
    fn neg(self) -> Laurent<C> {
        -&self
    }
}

pub(crate) fn write_terms<C: Coeff>(f: &mut fmt::Formatter<'_>, start: i64, coeffs: &[C]) -> fmt::Result {
    let mut first = true;
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let k = start + i as i64;
        let neg = c.is_negative();
        let mag = c.abs();
        if first {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, "{}", if neg { " - " } else { " + " })?;
        }
        first = false;
        let show_mag = !mag.is_one() || k == 0;
        match (show_mag, k) {
            (_, 0) => write!(f, "{}", mag)?,
            (true, 1) => write!(f, "{}t", mag)?,
            (false, 1) => write!(f, "t")?,
            (true, _) => write!(f, "{}t^{}", mag, k)?,
            (false, _) => write!(f, "t^{}", k)?,
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl<C: Coeff> fmt::Display for Laurent<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        write_terms(f, self.valuation, self.body.coeffs())?;
        write!(f, " + O(t^{})", self.abs_precision().unwrap())
    }
}

impl<C: Coeff + CoeffJson> Serialize for Laurent<C> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Laurent", 3)?;
        st.serialize_field("valuation", &self.valuation)?;
        let coeffs: Vec<_> = self.body.coeffs().iter().map(CoeffJson::to_json).collect();
        st.serialize_field("coeffs", &coeffs)?;
        st.serialize_field("order", &self.order())?;
        st.end()
    }
}

#[derive(Deserialize)]
struct LaurentRepr {
    valuation: i64,
    coeffs: Vec<serde_json::Value>,
    order: usize,
}

impl<'de, C: Coeff + CoeffJson> Deserialize<'de> for Laurent<C> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = LaurentRepr::deserialize(d)?;
        if r.coeffs.len() != r.order {
            return Err(D::Error::custom("coeffs length must equal order"));
        }
        let coeffs = r
            .coeffs
            .iter()
            .map(|v| C::from_json(v).ok_or_else(|| D::Error::custom(format!("bad coefficient {v}"))))
            .collect::<Result<Vec<C>, _>>()?;
        Ok(Self::from_window(r.valuation, coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(terms: &[(i64, i64)], abs: i64) -> NovikovSeries {
        NovikovSeries::from_i64_terms(terms, abs)
    }

    #[test]
    fn additive_identity() {
        let s = z(&[(-1, 3), (2, 5)], 8);
        assert_eq!(&NovikovSeries::zero() + &s, s);
    }

    #[test]
    fn cancellation_renormalizes_valuation() {
        let a = z(&[(-1, 1), (0, 1)], 16);
        let b = z(&[(-1, -1)], 16);
        let s = a.checked_add(&b).unwrap();
        assert_eq!(s.valuation(), 0);
        assert!(s.agrees_to(&NovikovSeries::one(16), 16));
    }

    #[test]
    fn doubling() {
        let a = z(&[(0, 1), (1, 1)], 16);
        assert!((&a + &a).agrees_to(&z(&[(0, 2), (1, 2)], 16), 16));
    }

    #[test]
    fn total_cancellation_is_a_precision_error() {
        let a = z(&[(0, 1), (1, 1)], 16);
        assert_eq!(a.checked_add(&(-&a)), Err(RingError::PrecisionUnderflow));
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn products() {
        let t = z(&[(1, 1)], 17);
        let tinv = z(&[(-1, 1)], 15);
        assert!((&t * &tinv).agrees_to(&NovikovSeries::one(16), 16));
        let one_minus_t = z(&[(0, 1), (1, -1)], 16);
        let geom = NovikovSeries::from_window(0, vec![BigInt::from(1); 16]);
        assert!((&one_minus_t * &geom).agrees_to(&NovikovSeries::one(16), 16));
    }

    #[test]
    fn inverses() {
        let one_minus_t = z(&[(0, 1), (1, -1)], 16);
        let geom = NovikovSeries::from_window(0, vec![BigInt::from(1); 16]);
        assert!(one_minus_t.inverse().unwrap().agrees_to(&geom, 16));
        let t = z(&[(1, 1)], 17);
        assert!(t.inverse().unwrap().agrees_to(&z(&[(-1, 1)], 15), 15));
        assert!(matches!(z(&[(0, 2)], 16).inverse(), Err(RingError::NotAUnit(_))));
    }

    #[test]
    fn json_shape() {
        let s = z(&[(-2, 1), (0, -3)], 2);
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v, serde_json::json!({"valuation": -2, "coeffs": [1, 0, -3, 0], "order": 4}));
        let back: NovikovSeries = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }
}
