//! Return maps on regular levels, Lefschetz numbers of their iterates and
//! the Lefschetz zeta series.

mod circle;
mod level;

pub use level::{build_return_map, ReturnMap, DEFAULT_RESOLUTION};

use serde::Serialize;

use crate::flow::{FiberMap, FlowError, FlowScene, SceneKind};
use crate::novikov::{check_regular, NovikovError};
use crate::rings::{rat, series_exp, RingError, TruncatedSeries, WittUnit};

/// `|(Phi^n)'(x) - 1|` below this is a degenerate fixed point.
pub const DEGENERACY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ZetaError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("{value} is not a regular value: {id} has value {critical} mod 1")]
    RegularValueError { value: f64, id: String, critical: f64 },
    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),
    #[error("degenerate fixed point of iterate {n} at {at:?}: {reason}")]
    DegenerateFixedPoint { n: usize, at: Vec<f64>, reason: String },
    #[error("level {0} is not a graph over the fiber coordinate")]
    LevelNotAGraph(f64),
    #[error("scene `{0}` has no return map")]
    NotApplicable(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

impl From<NovikovError> for ZetaError {
    fn from(e: NovikovError) -> Self {
        match e {
            NovikovError::RegularValueError { value, id, critical } => ZetaError::RegularValueError { value, id, critical },
            NovikovError::Flow(f) => ZetaError::Flow(f),
            e => ZetaError::NotApplicable(e.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPoint {
    pub n: usize,
    /// Fiber coordinates of the fixed point.
    pub at: Vec<f64>,
    /// `(Phi^n)'(x)` (determinant of `D Phi^n` on two-dimensional fibers).
    pub derivative: f64,
    pub index: i64,
    /// False when the orbit passes within the trap-radius image of a boundary
    /// of the domain of the partial map.
    pub reliable: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZetaReport {
    pub family: String,
    pub lambda: Option<f64>,
    pub order: usize,
    /// `L(Phi^n)` for `n = 1..=order`.
    pub counts: Vec<i64>,
    /// Individual fixed points (omitted for linear torus monodromies, where
    /// they are enumerated in bulk).
    pub fixed_points: Vec<FixedPoint>,
    pub reliable: bool,
    /// `zeta` modulo `t^(order + 1)`.
    pub series: WittUnit,
}

/// Fixed-point indices summed per iterate, `n = 1..=order`.
pub fn lefschetz_counts(rm: &ReturnMap, order: usize) -> Result<(Vec<i64>, Vec<FixedPoint>), ZetaError> {
    let mut counts = Vec::with_capacity(order);
    let mut points = Vec::new();
    for n in 1..=order {
        let fps = rm.fixed_points(n)?;
        counts.push(fps.iter().map(|f| f.index).sum());
        points.extend(fps);
    }
    Ok((counts, points))
}

/// `exp(sum_n L(Phi^n) t^n / n)` modulo `t^(counts.len() + 1)`.
pub fn zeta_series(counts: &[i64]) -> Result<WittUnit, ZetaError> {
    let mut c = vec![rat(0, 1)];
    c.extend(counts.iter().enumerate().map(|(i, &l)| rat(l, i as i64 + 1)));
    Ok(series_exp(&TruncatedSeries::new(c))?)
}

/// Lefschetz numbers and zeta series of the return map of `scene` at the
/// regular value `lambda` (ignored for mapping tori).
pub fn zeta(scene: &FlowScene, lambda: f64, order: usize, resolution: usize) -> Result<ZetaReport, ZetaError> {
    let (lambda, counts, fixed_points) = match scene.kind() {
        SceneKind::MappingTorus => {
            let fiber = scene.fiber_map().expect("mapping torus has a fiber map");
            let (c, f) = match fiber {
                FiberMap::Torus { matrix } => (circle::linear_torus_counts(*matrix, order)?, Vec::new()),
                FiberMap::Circle { .. } => circle::circle_map_counts(fiber, order, resolution)?,
            };
            (None, c, f)
        }
        SceneKind::CircleValued => {
            check_regular(scene, lambda)?;
            let rm = build_return_map(scene, lambda, resolution)?;
            let (c, f) = lefschetz_counts(&rm, order)?;
            (Some(lambda), c, f)
        }
        SceneKind::RealValued => return Err(ZetaError::NotApplicable(scene.family().to_string())),
    };
    let series = zeta_series(&counts)?;
    let reliable = fixed_points.iter().all(|f| f.reliable);
    Ok(ZetaReport { family: scene.family().to_string(), lambda, order, counts, fixed_points, reliable, series })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_counts_give_one() {
        assert!(zeta_series(&[0, 0, 0, 0]).unwrap().is_one());
    }

    #[test]
    fn non_integral_counts_are_reported() {
        // L = (1, 0) gives exp(t) = 1 + t + t^2/2
        assert!(matches!(zeta_series(&[1, 0]), Err(ZetaError::Ring(RingError::NonIntegral { degree: 2, .. }))));
    }
}
