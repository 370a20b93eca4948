//! Morse complexes of real-valued surface scenes, the C0-stability
//! experiment and induced chain maps.

mod induced;
pub(crate) mod intersect;
mod maps;
mod stability;

pub(crate) use induced::saddle_curve;
pub use induced::{induced_map, induced_map_between, InducedMap};
pub use maps::{SurfaceMap, GENERIC_OFFSET};
pub use stability::{stability_experiment, StabilityReport, TrialOutcome};

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use crate::flow::{diagnose, extract_separatrices, Connection, Direction, FlowError, FlowScene, SceneKind, Separatrix};
use crate::homalg::{homology, BasedComplex, HomalgError, HomologyReport, Matrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MorseError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("transversality failure: {0}")]
    TransversalityFailure(String),
    #[error("boundary of degree {upper} composed with degree {lower} is nonzero at ({row}, {col})")]
    SignInconsistency { upper: usize, lower: usize, row: usize, col: usize },
    #[error("chain map identity fails in degree {degree} at row {row}, column {col}")]
    ChainMapViolation { degree: usize, row: usize, col: usize },
    #[error("scene `{0}` is not real-valued")]
    NotRealValued(String),
    #[error("map {map} is not defined on scene `{scene}`")]
    UnsupportedMap { map: String, scene: String },
    #[error(transparent)]
    Homalg(HomalgError),
}

impl From<HomalgError> for MorseError {
    fn from(e: HomalgError) -> Self {
        match e {
            HomalgError::BoundarySquareNonzero { upper, lower, row, col } => {
                MorseError::SignInconsistency { upper, lower, row, col }
            }
            HomalgError::ChainMapViolation { degree, row, col } => MorseError::ChainMapViolation { degree, row, col },
            e => MorseError::Homalg(e),
        }
    }
}

pub(crate) fn connection_message(c: &[Connection]) -> String {
    c.iter()
        .map(|c| format!("{} {:?} {:+} reaches saddle {} {:?}", c.from, c.direction, c.branch, c.to.id, c.to.shift))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Morse complex with basis in degree `k` the critical points of index `k`,
/// ordered by value.
#[derive(Clone, Debug)]
pub struct MorseComplex {
    pub family: String,
    pub complex: BasedComplex<i64>,
    pub separatrices: Vec<Separatrix>,
}

impl MorseComplex {
    pub fn generators(&self, k: usize) -> &[String] {
        self.complex.basis(k)
    }

    /// Incidence matrices `d_1, d_2` as nested vectors.
    pub fn incidences(&self) -> Vec<Vec<Vec<i64>>> {
        (1..self.complex.num_degrees())
            .map(|k| {
                let d = self.complex.boundary(k);
                (0..d.nrows()).map(|i| d.row(i).to_vec()).collect()
            })
            .collect()
    }

    pub fn homology(&self) -> HomologyReport {
        homology(&self.complex)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "family": self.family,
            "complex": self.complex.to_json(),
            "homology": self.homology(),
            "separatrices": self.separatrices.len(),
        })
    }
}

pub(crate) fn basis_by_index(scene: &FlowScene) -> Vec<Vec<String>> {
    (0..3).map(|k| scene.critical_of_index(k).into_iter().map(|c| c.id.clone()).collect()).collect()
}

/// Signed incidence of every separatrix whose terminus is a critical point:
/// descending branches give `d_1` entries, ascending branches `d_2` entries.
pub(crate) fn incidence_matrices(
    basis: &[Vec<String>],
    seps: &[Separatrix],
) -> (Matrix<i64>, Matrix<i64>) {
    let pos: Vec<BTreeMap<&str, usize>> =
        basis.iter().map(|b| b.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()).collect();
    let mut d1 = Matrix::zeros(basis[0].len(), basis[1].len());
    let mut d2 = Matrix::zeros(basis[1].len(), basis[2].len());
    for s in seps {
        let Some(lift) = s.terminus.critical() else { continue };
        let p = pos[1][s.origin.id.as_str()];
        match s.direction {
            Direction::Descending => {
                if let Some(&q) = pos[0].get(lift.id.as_str()) {
                    d1.add_to(q, p, &(s.sign as i64));
                }
            }
            Direction::Ascending => {
                if let Some(&q) = pos[2].get(lift.id.as_str()) {
                    d2.add_to(p, q, &(s.sign as i64));
                }
            }
        }
    }
    (d1, d2)
}

/// Builds the Morse complex of a validated real-valued surface scene from
/// its separatrices.
pub fn build_morse_complex(scene: &FlowScene) -> Result<MorseComplex, MorseError> {
    if scene.kind() != SceneKind::RealValued {
        return Err(MorseError::NotRealValued(scene.family().to_string()));
    }
    let seps = extract_separatrices(scene, None)?;
    let diag = diagnose(scene, &seps);
    if !diag.pass {
        return Err(MorseError::TransversalityFailure(connection_message(&diag.connections)));
    }
    let basis = basis_by_index(scene);
    let (d1, d2) = incidence_matrices(&basis, &seps);
    let complex = BasedComplex::from_boundaries((), basis, vec![d1, d2])?;
    Ok(MorseComplex { family: scene.family().to_string(), complex, separatrices: seps })
}

#[derive(Clone, Debug, Serialize)]
pub struct MorseSummary {
    pub family: String,
    pub generators: Vec<usize>,
    pub betti: Vec<usize>,
    pub torsion_free: bool,
}

impl From<&MorseComplex> for MorseSummary {
    fn from(m: &MorseComplex) -> Self {
        let h = m.homology();
        Self {
            family: m.family.clone(),
            generators: (0..m.complex.num_degrees()).map(|k| m.complex.dim(k)).collect(),
            betti: h.betti(),
            torsion_free: h.is_free(),
        }
    }
}
