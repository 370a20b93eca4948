//! The comparison map from cellular chains to the Novikov complex, the
//! torsion `w` of its cone and the torsion-zeta identity `w zeta = 1`.

mod cells;
mod schutz;

pub use cells::{circle_model, torus_model, CellKind, CellStructure, Grid, CELL_OFFSET};
pub use schutz::{schutz_map, CellRecord, SchutzMap};

use serde::Serialize;

use crate::flow::{FlowError, FlowScene};
use crate::homalg::{mapping_cone, novikov_homology_ranks, torsion_to, HomalgError};
use crate::novikov::NovikovError;
use crate::rings::WittUnit;
use crate::zeta::{zeta, ZetaError, ZetaReport, DEFAULT_RESOLUTION};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Novikov(#[from] NovikovError),
    #[error(transparent)]
    Homalg(#[from] HomalgError),
    #[error(transparent)]
    Zeta(#[from] ZetaError),
    #[error("transversality failure: {0}")]
    TransversalityFailure(String),
    #[error("scene `{0}` has no cell structure")]
    NoCellStructure(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsionReport {
    pub family: String,
    pub order: usize,
    pub cells: usize,
    /// Ranks of the homology of the cone over `Q((t))`.
    pub cone_ranks: Vec<usize>,
    pub w: WittUnit,
}

/// `w = tau(Cone xi)^(-1)`, normalized to `1 + t Z[[t]]` and known to
/// `order`, which must not exceed the precision of `cells`.
///
/// The inverse fixes the degree-parity convention: with the torsion of a
/// single boundary `u: C_1 -> C_0` equal to `u`, the cone of `xi` carries the
/// cellular complex one degree up, so `tau(Cone xi)` is `tau(N) / tau(C)` up
/// to that shift.
pub fn torsion_w(scene: &FlowScene, cells: &CellStructure, lambda: f64, order: usize) -> Result<TorsionReport, VerifyError> {
    let xi = schutz_map(scene, cells, lambda)?;
    let cone = mapping_cone(&xi.chain_map)?;
    let cone_ranks = novikov_homology_ranks(&cone)?;
    let w = torsion_to(&cone, order.min(cells.order))?.inverse();
    Ok(TorsionReport { family: scene.family().to_string(), order, cells: cells.complex.total_dim(), cone_ranks, w })
}

/// `w` to order `order` on the shipped cell structure at refinement
/// `level`. Seam entries `t^-1` cost one order of relative precision per
/// factor of the determinant, so the complexes are built with a guard of
/// one order per cell.
pub fn shipped_w(scene: &FlowScene, lambda: f64, order: usize, level: u32) -> Result<TorsionReport, VerifyError> {
    let guard = CellStructure::shipped(scene, order, level)?.complex.total_dim();
    let cells = CellStructure::shipped(scene, order + guard, level)?;
    torsion_w(scene, &cells, lambda, order)
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub family: String,
    pub order: usize,
    pub applicable: bool,
    pub w: Option<WittUnit>,
    pub zeta: Option<WittUnit>,
    pub product: Option<WittUnit>,
    pub pass: bool,
    /// Degree of the first coefficient of `w zeta` that differs from 1.
    pub first_mismatch: Option<usize>,
    pub diagnostic: Option<String>,
}

/// Compares `w zeta` with 1 through `t^order`. Scenes whose return map has
/// degenerate fixed points (a trivial monodromy) are reported as not
/// applicable with the zeta diagnostic.
pub fn check_torsion_zeta(scene: &FlowScene, lambda: f64, order: usize) -> Result<Verdict, VerifyError> {
    let family = scene.family().to_string();
    let z: ZetaReport = match zeta(scene, lambda, order, DEFAULT_RESOLUTION) {
        Ok(z) => z,
        Err(e @ ZetaError::DegenerateFixedPoint { .. }) => {
            return Ok(Verdict {
                family,
                order,
                applicable: false,
                w: None,
                zeta: None,
                product: None,
                pass: false,
                first_mismatch: None,
                diagnostic: Some(e.to_string()),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let w = shipped_w(scene, lambda, order + 1, 0)?.w;
    let zeta = z.series.truncate(order + 1);
    let product = w.mul(&zeta);
    let first_mismatch = product.first_mismatch(&WittUnit::one(order + 1), order + 1);
    let diagnostic = (!z.reliable).then(|| "some fixed points lie near the boundary of the return map's domain".to_string());
    Ok(Verdict {
        family,
        order,
        applicable: true,
        pass: first_mismatch.is_none(),
        w: Some(w),
        zeta: Some(zeta),
        product: Some(product),
        first_mismatch,
        diagnostic,
    })
}
