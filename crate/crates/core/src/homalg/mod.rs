//! Based free chain complexes over `Z` and truncated `Z((t))`: homology,
//! chain maps, mapping cones and torsion of acyclic complexes.

mod complex;
mod homology;
mod matrix;
mod snf;
mod torsion;

pub use complex::{BasedComplex, ChainMap};
pub use homology::{homology, homology_map, novikov_homology, novikov_homology_ranks, DegreeHomology, HomologyReport, NovikovHomology};
pub use matrix::Matrix;
pub use snf::{smith_normal_form, SmithForm};
pub use torsion::{laurent_det, mapping_cone, torsion, torsion_by_minors, torsion_to, torsion_with_contraction, Contraction};

use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::FromPrimitive;
use serde_json::Value;

use crate::rings::{NovikovSeries, RationalLaurent, RingError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HomalgError {
    #[error("boundary composite d_{lower} o d_{upper} is nonzero (first nonzero entry at row {row}, column {col})")]
    BoundarySquareNonzero { upper: usize, lower: usize, row: usize, col: usize },
    #[error("shape mismatch in degree {degree}: expected {expected:?}, got {got:?}")]
    ShapeMismatch { degree: usize, expected: (usize, usize), got: (usize, usize) },
    #[error("chain map identity fails in degree {degree} at row {row}, column {col}")]
    ChainMapViolation { degree: usize, row: usize, col: usize },
    #[error("complex is not acyclic: homology rank {rank} in degree {degree}")]
    NotAcyclic { degree: usize, rank: usize },
    #[error("torsion is not a unit of Z((t)): {0}")]
    NotAUnit(String),
    #[error("precision exhausted: pivot decision in degree {degree} needs coefficients beyond order {order}")]
    PrecisionExhausted { degree: usize, order: usize },
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Commutative coefficient ring of a based complex.
///
/// `Ctx` carries whatever is needed to build constants; for truncated
/// series it is the precision order, so that `one` is known to order `N`.
pub trait RingElem: Clone + PartialEq + Debug + Send + Sync {
    type Ctx: Clone + Debug + PartialEq + Send + Sync;

    fn zero() -> Self;
    fn one(ctx: &Self::Ctx) -> Self;
    fn from_int(n: i64, ctx: &Self::Ctx) -> Self;
    fn is_zero(&self) -> bool;
    /// Zero to the working precision of `ctx`.
    fn is_negligible(&self, ctx: &Self::Ctx) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn to_json(&self) -> Value;
    fn ring_name(ctx: &Self::Ctx) -> String;
}

impl RingElem for i64 {
    type Ctx = ();

    fn zero() -> Self {
        0
    }
    fn one(_: &()) -> Self {
        1
    }
    fn from_int(n: i64, _: &()) -> Self {
        n
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negligible(&self, _: &()) -> bool {
        *self == 0
    }
    fn add(&self, rhs: &Self) -> Self {
        self.checked_add(*rhs).expect("integer overflow")
    }
    fn sub(&self, rhs: &Self) -> Self {
        self.checked_sub(*rhs).expect("integer overflow")
    }
    fn mul(&self, rhs: &Self) -> Self {
        self.checked_mul(*rhs).expect("integer overflow")
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn to_json(&self) -> Value {
        Value::from(*self)
    }
    fn ring_name(_: &()) -> String {
        "Z".into()
    }
}

impl RingElem for BigInt {
    type Ctx = ();

    fn zero() -> Self {
        BigInt::from(0)
    }
    fn one(_: &()) -> Self {
        BigInt::from(1)
    }
    fn from_int(n: i64, _: &()) -> Self {
        BigInt::from(n)
    }
    fn is_zero(&self) -> bool {
        self.sign() == num_bigint::Sign::NoSign
    }
    fn is_negligible(&self, _: &()) -> bool {
        RingElem::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }
    fn ring_name(_: &()) -> String {
        "Z".into()
    }
}

macro_rules! laurent_ring {
    ($ty:ty, $name:literal) => {
        impl RingElem for $ty {
            /// Precision order `N`: results are meaningful modulo `t^N`.
            type Ctx = usize;

            fn zero() -> Self {
                <$ty>::zero()
            }
            fn one(order: &usize) -> Self {
                <$ty>::one(*order)
            }
            fn from_int(n: i64, order: &usize) -> Self {
                <$ty>::monomial(FromPrimitive::from_i64(n).expect("integer"), 0, *order)
            }
            fn is_zero(&self) -> bool {
                <$ty>::is_zero(self)
            }
            fn is_negligible(&self, order: &usize) -> bool {
                self.vanishes_to(*order as i64)
            }
            fn add(&self, rhs: &Self) -> Self {
                self + rhs
            }
            fn sub(&self, rhs: &Self) -> Self {
                self - rhs
            }
            fn mul(&self, rhs: &Self) -> Self {
                self * rhs
            }
            fn neg(&self) -> Self {
                -self
            }
            fn to_json(&self) -> Value {
                serde_json::to_value(self).expect("series serialize")
            }
            fn ring_name(order: &usize) -> String {
                format!(concat!($name, " mod t^{}"), order)
            }
        }
    };
}

laurent_ring!(NovikovSeries, "Z((t))");
laurent_ring!(RationalLaurent, "Q((t))");
