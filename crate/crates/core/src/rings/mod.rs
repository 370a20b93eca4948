//! Exact arithmetic for truncated power series `Z[[t]]/t^N`, truncated
//! Laurent series `Z((t))` and the torsion group `W = 1 + tZ[[t]]`.
//!
//! Every series carries its precision explicitly. Laurent series use a
//! relative-precision model: a nonzero element is `t^v (c_0 + c_1 t + ...)`
//! with `c_0 != 0` and `order` known body coefficients. Zero is exact.

mod coeff;
mod laurent;
mod truncated;
mod witt;

pub use coeff::{parse_coeff, Coeff, CoeffJson};
pub use laurent::{Laurent, NovikovSeries, RationalLaurent};
pub use truncated::TruncatedSeries;
pub use witt::{normalize_torsion, series_exp, series_log, WittUnit};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Default precision order for runs that do not override it.
pub const DEFAULT_ORDER: usize = 16;

pub type Int = BigInt;
pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RingError {
    #[error("precision underflow: every known coefficient cancelled")]
    PrecisionUnderflow,
    #[error("not a unit: leading coefficient {0}")]
    NotAUnit(String),
    #[error("series has nonzero constant term {0}")]
    NonzeroConstantTerm(String),
    #[error("free term must be 1, got {0}")]
    FreeTermNotOne(String),
    #[error("coefficient of t^{degree} is not an integer: {value}")]
    NonIntegral { degree: usize, value: String },
    #[error("empty series (order 0)")]
    EmptySeries,
}

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
