//! Novikov complexes of circle-valued scenes over `Z((t))`, computed to a
//! precision order `N` by unrolling the infinite cyclic covering.
//!
//! The deck generator `t` lowers the lifted function by one: on the
//! unrolled chart it is the translation `theta -> theta - 1`, so the
//! critical lift `p + (a, b)` is `t^(-a)` times the lift `p`.

mod induced;
mod tower;

pub use induced::{novikov_induced_map, LiftedMap, NovikovInducedMap};
pub(crate) use induced::trace_lift;
pub use tower::{truncation_tower_check, unrolled_complex, TowerReport};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::flow::{diagnose, trace_branch, Direction, FlowError, FlowScene, SceneKind, Separatrix};
use crate::homalg::{novikov_homology, BasedComplex, HomalgError, Matrix, NovikovHomology};
use crate::morse::connection_message;
use crate::rings::NovikovSeries;

/// Distance in `R/Z` below which a level counts as critical.
pub const REGULAR_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NovikovError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("{value} is not a regular value: {id} has value {critical} mod 1")]
    RegularValueError { value: f64, id: String, critical: f64 },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("mismatch in degree {degree} at ({row}, {col}): {detail}")]
    MismatchError { degree: usize, row: String, col: String, detail: String },
    #[error("lift of the map is not declared")]
    LiftAmbiguity,
    #[error("transversality failure: {0}")]
    TransversalityFailure(String),
    #[error("boundary of degree {upper} composed with degree {lower} is nonzero at ({row}, {col})")]
    SignInconsistency { upper: usize, lower: usize, row: usize, col: usize },
    #[error("chain map identity fails in degree {degree} at row {row}, column {col}")]
    ChainMapViolation { degree: usize, row: usize, col: usize },
    #[error("scene `{0}` is not circle-valued")]
    NotCircleValued(String),
    #[error("map {map} is not defined on scene `{scene}`")]
    UnsupportedMap { map: String, scene: String },
    #[error(transparent)]
    Homalg(HomalgError),
}

impl From<HomalgError> for NovikovError {
    fn from(e: HomalgError) -> Self {
        match e {
            HomalgError::BoundarySquareNonzero { upper, lower, row, col } => {
                NovikovError::SignInconsistency { upper, lower, row, col }
            }
            HomalgError::ChainMapViolation { degree, row, col } => NovikovError::ChainMapViolation { degree, row, col },
            e => NovikovError::Homalg(e),
        }
    }
}

/// Maps tracing failures caused by the requested depth to `PrecisionExhausted`.
pub(crate) fn depth_error(e: FlowError, order: usize) -> NovikovError {
    match e {
        FlowError::Branch { branch, source } if matches!(*source, FlowError::MaxLengthExceeded { .. }) => {
            NovikovError::PrecisionExhausted(format!("{branch}: order {order} needs longer traces than the arc length limit"))
        }
        e => NovikovError::Flow(e),
    }
}

pub(crate) fn require_circle_valued(scene: &FlowScene) -> Result<(), NovikovError> {
    if scene.kind() != SceneKind::CircleValued {
        return Err(NovikovError::NotCircleValued(scene.family().to_string()));
    }
    Ok(())
}

/// Rejects `lambda` within [`REGULAR_TOL`] of a critical value mod 1.
pub fn check_regular(scene: &FlowScene, lambda: f64) -> Result<(), NovikovError> {
    for c in scene.critical_points() {
        let d = c.value - lambda;
        if (d - d.round()).abs() < REGULAR_TOL {
            return Err(NovikovError::RegularValueError {
                value: lambda,
                id: c.id.clone(),
                critical: c.value.rem_euclid(1.0),
            });
        }
    }
    Ok(())
}

/// Midpoint of the widest gap between critical values mod 1 (0.5 when
/// there are no critical points).
pub fn default_regular_value(scene: &FlowScene) -> f64 {
    let mut v: Vec<f64> = scene.critical_points().iter().map(|c| c.value.rem_euclid(1.0)).collect();
    if v.is_empty() {
        return 0.5;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best = (v[0] + 1.0 - v[v.len() - 1], v[v.len() - 1]);
    for w in v.windows(2) {
        if w[1] - w[0] > best.0 {
            best = (w[1] - w[0], w[0]);
        }
    }
    (best.1 + best.0 / 2.0).rem_euclid(1.0)
}

/// Chart shift `a` such that `p + (a, 0)` has value in `(lambda - 1, lambda]`.
pub fn basis_shift(value: f64, lambda: f64) -> i64 {
    (lambda - value).floor() as i64
}

/// Lattice shift of the lift `t^k` of the basis lift with shift `a`.
pub(crate) fn lift_shift(a: i64, k: i64) -> [i64; 2] {
    [a - k, 0]
}

/// Deck power of the lift with chart shift `s` relative to the basis lift with shift `a`.
pub(crate) fn deck_power(a: i64, s: [i64; 2]) -> i64 {
    a - s[0]
}

#[derive(Clone, Debug)]
pub struct NovikovComplex {
    pub family: String,
    pub lambda: f64,
    pub order: usize,
    /// Chart shift of the chosen lift of each critical point.
    pub lifts: BTreeMap<String, i64>,
    pub complex: BasedComplex<NovikovSeries>,
    pub separatrices: Vec<Separatrix>,
}

impl NovikovComplex {
    pub fn homology(&self) -> Result<NovikovHomology, NovikovError> {
        Ok(novikov_homology(&self.complex)?)
    }

    /// Boundary entry coefficients `(t^0 .. t^(order-1))` by degree, row, column.
    pub fn coefficient_table(&self) -> Vec<Vec<Vec<Vec<i64>>>> {
        let n = self.order as i64;
        (1..self.complex.num_degrees())
            .map(|k| {
                let d = self.complex.boundary(k);
                (0..d.nrows())
                    .map(|i| {
                        (0..d.ncols())
                            .map(|j| d.get(i, j).window(0, n).iter().map(|c| i64::try_from(c).expect("small count")).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "family": self.family,
            "lambda": self.lambda,
            "order": self.order,
            "lifts": self.lifts,
            "complex": self.complex.to_json(),
            "coefficients": self.coefficient_table(),
        })
    }
}

/// Separatrices of every saddle lifted into the value window
/// `(lambda - 1, lambda]`, traced down to `lambda - depth` and up to
/// `lambda + depth`.
pub(crate) fn lifted_separatrices(
    scene: &FlowScene,
    lambda: f64,
    depth: usize,
    lifts: &BTreeMap<String, i64>,
) -> Result<Vec<Separatrix>, NovikovError> {
    let saddles = scene.critical_of_index(1);
    let jobs: Vec<_> = saddles
        .iter()
        .flat_map(|c| {
            [Direction::Descending, Direction::Ascending]
                .into_iter()
                .flat_map(move |d| [1i8, -1].into_iter().map(move |b| (*c, d, b)))
        })
        .collect();
    jobs.par_iter()
        .map(|(c, d, b)| {
            let level = match d {
                Direction::Descending => lambda - depth as f64,
                Direction::Ascending => lambda + depth as f64,
            };
            trace_branch(scene, c, lift_shift(lifts[&c.id], 0), *d, *b, Some(level)).map_err(|e| depth_error(e, depth))
        })
        .collect()
}

pub(crate) fn choose_lifts(scene: &FlowScene, lambda: f64) -> BTreeMap<String, i64> {
    scene.critical_points().iter().map(|c| (c.id.clone(), basis_shift(c.value, lambda))).collect()
}

pub(crate) fn bases(scene: &FlowScene) -> Vec<Vec<String>> {
    (0..3).map(|k| scene.critical_of_index(k).into_iter().map(|c| c.id.clone()).collect()).collect()
}

/// Builds the Novikov complex to order `order`: the coefficient of `t^k`
/// in entry `(q, p)` counts, with signs, flow lines from the basis lift of
/// `p` to `t^k` times the basis lift of `q`.
pub fn build_novikov_complex(scene: &FlowScene, lambda: f64, order: usize) -> Result<NovikovComplex, NovikovError> {
    require_circle_valued(scene)?;
    check_regular(scene, lambda)?;
    let lifts = choose_lifts(scene, lambda);
    let seps = lifted_separatrices(scene, lambda, order, &lifts)?;
    let diag = diagnose(scene, &seps);
    if !diag.pass {
        return Err(NovikovError::TransversalityFailure(connection_message(&diag.connections)));
    }
    let basis = bases(scene);
    let pos: Vec<BTreeMap<&str, usize>> =
        basis.iter().map(|b| b.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()).collect();
    let mut terms: Vec<BTreeMap<(usize, usize), Vec<(i64, i64)>>> = vec![BTreeMap::new(), BTreeMap::new()];
    for s in &seps {
        let Some(lift) = s.terminus.critical() else { continue };
        let p = pos[1][s.origin.id.as_str()];
        let power = deck_power(lifts[&lift.id], lift.shift);
        match s.direction {
            Direction::Descending => {
                // flow line from the saddle down to t^power q
                let q = pos[0][lift.id.as_str()];
                terms[0].entry((q, p)).or_default().push((power, s.sign as i64));
            }
            Direction::Ascending => {
                // flow line from t^power M down to the saddle, i.e. from M to t^(-power) p
                let m = pos[2][lift.id.as_str()];
                terms[1].entry((p, m)).or_default().push((-power, s.sign as i64));
            }
        }
    }
    let n = order as i64;
    for t in terms.iter().flat_map(|m| m.values()).flatten() {
        debug_assert!(t.0 >= 0, "negative deck power {t:?}");
    }
    let shapes = [(basis[0].len(), basis[1].len()), (basis[1].len(), basis[2].len())];
    let mats: Vec<Matrix<NovikovSeries>> = terms
        .iter()
        .zip(shapes)
        .map(|(t, (r, c))| {
            let mut m = Matrix::zeros(r, c);
            for (&(i, j), v) in t {
                m.set(i, j, NovikovSeries::from_i64_terms(v, n));
            }
            m
        })
        .collect();
    let complex = BasedComplex::from_boundaries(order, basis, mats)?;
    Ok(NovikovComplex { family: scene.family().to_string(), lambda, order, lifts, complex, separatrices: seps })
}

#[derive(Clone, Debug, Serialize)]
pub struct NovikovSummary {
    pub family: String,
    pub lambda: f64,
    pub order: usize,
    pub generators: Vec<usize>,
    pub homology: NovikovHomology,
}
