use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::coeff::{Coeff, CoeffJson};
use super::RingError;

/// Element of `C[[t]]/t^N`: `coeffs[k]` is the coefficient of `t^k` and the
/// precision order `N` is `coeffs.len()`.
#[derive(Clone, PartialEq, Debug)]
pub struct TruncatedSeries<C> {
    coeffs: Vec<C>,
}

impl<C: Coeff> TruncatedSeries<C> {
    pub fn new(coeffs: Vec<C>) -> Self {
        Self { coeffs }
    }

    /// Builds a series of the given order, padding or truncating `coeffs`.
    pub fn with_order(mut coeffs: Vec<C>, order: usize) -> Self {
        coeffs.resize(order, C::zero());
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![C::zero(); order] }
    }

    pub fn one(order: usize) -> Self {
        Self::monomial(C::one(), 0, order)
    }

    pub fn monomial(c: C, k: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k < order {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Option<&C> {
        self.coeffs.get(k)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::with_order(self.coeffs.iter().take(order).cloned().collect(), order.min(self.order()))
    }

    pub fn scale(&self, c: &C) -> Self {
        Self { coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect() }
    }

    /// Lowest index with a nonzero coefficient.
    pub fn lowest_nonzero(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Multiplicative inverse; requires an invertible constant term.
    pub fn inverse(&self) -> Result<Self, RingError> {
        let c0 = self.coeffs.first().ok_or(RingError::EmptySeries)?;
        let inv0 = c0.try_inv().ok_or_else(|| RingError::NotAUnit(c0.to_string()))?;
        let n = self.order();
        let mut out: Vec<C> = Vec::with_capacity(n);
        out.push(inv0.clone());
        for k in 1..n {
            let mut acc = C::zero();
            for j in 1..=k {
                acc = acc + self.coeffs[j].clone() * out[k - j].clone();
            }
            out.push(-(acc * inv0.clone()));
        }
        Ok(Self { coeffs: out })
    }

    /// Formal derivative, order drops by one.
    fn derivative(&self) -> Vec<C> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.clone() * from_usize::<C>(k))
            .collect()
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> TruncatedSeries<D> {
        TruncatedSeries { coeffs: self.coeffs.iter().map(f).collect() }
    }
}

pub(crate) fn from_usize<C: Coeff>(k: usize) -> C {
    C::from_usize(k).expect("small integer fits the coefficient ring")
}

impl<C: Coeff> TruncatedSeries<C> {
    /// `exp` of a series with zero constant term, via `n b_n = sum k a_k b_{n-k}`.
    pub fn exp(&self) -> Result<Self, RingError>
    where
        C: std::ops::Div<Output = C>,
    {
        let n = self.order();
        if n == 0 {
            return Err(RingError::EmptySeries);
        }
        if !self.coeffs[0].is_zero() {
            return Err(RingError::NonzeroConstantTerm(self.coeffs[0].to_string()));
        }
        let mut b: Vec<C> = vec![C::one()];
        for m in 1..n {
            let mut acc = C::zero();
            for k in 1..=m {
                acc = acc + from_usize::<C>(k) * self.coeffs[k].clone() * b[m - k].clone();
            }
            b.push(acc / from_usize::<C>(m));
        }
        Ok(Self { coeffs: b })
    }

    /// `log` of a series with constant term 1, computed as the integral of `b'/b`.
    pub fn log(&self) -> Result<Self, RingError>
    where
        C: std::ops::Div<Output = C>,
    {
        let n = self.order();
        let c0 = self.coeffs.first().ok_or(RingError::EmptySeries)?;
        if !c0.is_one() {
            return Err(RingError::FreeTermNotOne(c0.to_string()));
        }
        let inv = self.inverse()?;
        let d = self.derivative();
        let mut out = vec![C::zero(); n];
        for m in 1..n {
            // coefficient of t^{m-1} in b' * b^{-1}
            let mut acc = C::zero();
            for j in 0..m {
                acc = acc + d[j].clone() * inv.coeffs[m - 1 - j].clone();
            }
            out[m] = acc / from_usize::<C>(m);
        }
        Ok(Self { coeffs: out })
    }
}

impl<C: Coeff> Add for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn add(self, rhs: Self) -> TruncatedSeries<C> {
        let n = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: (0..n).map(|k| self.coeffs[k].clone() + rhs.coeffs[k].clone()).collect(),
        }
    }
}

impl<C: Coeff> Sub for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn sub(self, rhs: Self) -> TruncatedSeries<C> {
        let n = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: (0..n).map(|k| self.coeffs[k].clone() - rhs.coeffs[k].clone()).collect(),
        }
    }
}

impl<C: Coeff> Neg for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn neg(self) -> TruncatedSeries<C> {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }
}

impl<C: Coeff> Mul for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn mul(self, rhs: Self) -> TruncatedSeries<C> {
        let n = self.order().min(rhs.order());
        let mut out = vec![C::zero(); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().take(n - i).enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        TruncatedSeries { coeffs: out }
    }
}

impl<C: Coeff> fmt::Display for TruncatedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        super::laurent::write_terms(f, 0, &self.coeffs)?;
        write!(f, " + O(t^{})", self.order())
    }
}

impl<C: Coeff + CoeffJson> Serialize for TruncatedSeries<C> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("TruncatedSeries", 2)?;
        let coeffs: Vec<_> = self.coeffs.iter().map(CoeffJson::to_json).collect();
        st.serialize_field("coeffs", &coeffs)?;
        st.serialize_field("order", &self.order())?;
        st.end()
    }
}
