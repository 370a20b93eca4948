use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use super::laurent::{Laurent, NovikovSeries};
use super::truncated::TruncatedSeries;
use super::{Rat, RingError};

/// Element of the multiplicative group `1 + tZ[[t]]`, truncated at `t^N`.
#[derive(Clone, PartialEq, Debug)]
pub struct WittUnit {
    series: TruncatedSeries<BigInt>,
}

impl WittUnit {
    pub fn new(series: TruncatedSeries<BigInt>) -> Result<Self, RingError> {
        match series.coeff(0) {
            None => Err(RingError::EmptySeries),
            Some(c) if !c.is_one() => Err(RingError::FreeTermNotOne(c.to_string())),
            Some(_) => Ok(Self { series }),
        }
    }

    pub fn one(order: usize) -> Self {
        Self { series: TruncatedSeries::one(order) }
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self, RingError> {
        Self::new(TruncatedSeries::new(coeffs.iter().map(|&c| BigInt::from(c)).collect()))
    }

    pub fn series(&self) -> &TruncatedSeries<BigInt> {
        &self.series
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    pub fn coeffs_i64(&self) -> Vec<i64> {
        use num_traits::ToPrimitive;
        self.series.coeffs().iter().map(|c| c.to_i64().unwrap_or(i64::MAX)).collect()
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self { series: &self.series * &rhs.series }
    }

    pub fn inverse(&self) -> Self {
        Self { series: self.series.inverse().expect("free term 1 is invertible") }
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self { series: self.series.truncate(order) }
    }

    pub fn is_one(&self) -> bool {
        self.series.coeffs().iter().skip(1).all(Zero::is_zero)
    }

    /// First index `k < order` where the coefficients of `self` and `other` differ.
    pub fn first_mismatch(&self, other: &Self, order: usize) -> Option<usize> {
        (0..order).find(|&k| self.series.coeff(k) != other.series.coeff(k))
    }

    pub fn to_laurent(&self) -> NovikovSeries {
        Laurent::from_series(&self.series)
    }
}

impl fmt::Display for WittUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.series.fmt(f)
    }
}

impl Serialize for WittUnit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.series.serialize(s)
    }
}

/// `exp` of a rational series with zero constant term. The result must have
/// integer coefficients; a fractional coefficient is reported rather than
/// rounded.
pub fn series_exp(a: &TruncatedSeries<Rat>) -> Result<WittUnit, RingError> {
    let e = a.exp()?;
    let mut out = Vec::with_capacity(e.order());
    for (degree, c) in e.coeffs().iter().enumerate() {
        if !c.is_integer() {
            return Err(RingError::NonIntegral { degree, value: c.to_string() });
        }
        out.push(c.to_integer());
    }
    WittUnit::new(TruncatedSeries::new(out))
}

pub fn series_log(u: &WittUnit) -> TruncatedSeries<Rat> {
    u.series
        .map(|c| BigRational::from_integer(c.clone()))
        .log()
        .expect("free term 1")
}

/// Strips `±t^v` from a unit of `Z((t))` so the result has free term 1.
pub fn normalize_torsion(u: &NovikovSeries) -> Result<WittUnit, RingError> {
    let lead = u.leading_coeff().ok_or_else(|| RingError::NotAUnit("0".into()))?;
    if !lead.abs().is_one() {
        return Err(RingError::NotAUnit(lead.to_string()));
    }
    let body = if lead.is_negative() { -u.body() } else { u.body().clone() };
    WittUnit::new(body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::rat;

    fn q(coeffs: &[(i64, i64)]) -> TruncatedSeries<Rat> {
        TruncatedSeries::new(coeffs.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    #[test]
    fn exp_of_zero_is_one() {
        assert!(series_exp(&TruncatedSeries::zero(8)).unwrap().is_one());
    }

    #[test]
    fn exp_log_of_one_plus_t() {
        let one_plus_t = WittUnit::from_i64(&[1, 1, 0, 0, 0, 0, 0, 0]).unwrap();
        let l = series_log(&one_plus_t);
        let expected: Vec<Rat> = (0..8)
            .map(|k| if k == 0 { rat(0, 1) } else { rat(if k % 2 == 1 { 1 } else { -1 }, k) })
            .collect();
        assert_eq!(l.coeffs(), expected.as_slice());
        assert_eq!(series_exp(&l).unwrap(), one_plus_t);
    }

    #[test]
    fn log_exp_of_t_squared() {
        let a = q(&[(0, 1), (0, 1), (1, 1), (0, 1), (0, 1), (0, 1)]);
        // exp(t^2) = 1 + t^2 + t^4/2 is not integral, so stay over Q
        assert_eq!(a.exp().unwrap().log().unwrap(), a);
    }

    #[test]
    fn exp_rejects_constant_term_and_fractions() {
        assert!(matches!(series_exp(&q(&[(1, 1), (0, 1)])), Err(RingError::NonzeroConstantTerm(_))));
        assert!(matches!(
            series_exp(&q(&[(0, 1), (1, 2), (0, 1)])),
            Err(RingError::NonIntegral { degree: 1, .. })
        ));
    }

    #[test]
    fn normalize_examples() {
        let u = NovikovSeries::from_i64_terms(&[(3, -1), (4, 1)], 19);
        assert_eq!(normalize_torsion(&u).unwrap().coeffs_i64()[..3], [1, -1, 0]);
        assert!(normalize_torsion(&NovikovSeries::one(16)).unwrap().is_one());
        let tm2 = NovikovSeries::from_i64_terms(&[(-2, 1)], 14);
        assert!(normalize_torsion(&tm2).unwrap().is_one());
        let two = NovikovSeries::from_i64_terms(&[(0, 2)], 16);
        assert!(matches!(normalize_torsion(&two), Err(RingError::NotAUnit(_))));
    }
}
