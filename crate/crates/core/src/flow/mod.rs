//! Surface scenes with analytic Morse data, gradient validation and
//! separatrix tracing.

mod geometry;
mod models;
mod perturb;
mod scene;
mod separatrix;
mod trace;
mod validate;

pub use geometry::{frame_coords, orient_det, tangent_frame, Lattice, M3, P3, V3};
pub use models::{FiberMap, SurfaceModel};
pub use perturb::{perturb, Perturbation};
pub use scene::{CriticalPoint, FieldTweak, FlowScene, SceneKind, SceneSpec};
pub use validate::PointCheck;
pub use separatrix::{
    check_almost_transversality, diagnose, extract_separatrices, seed, separatrix_csv, trace_branch, Connection,
    Diagnosis, Separatrix,
};
pub use trace::{trace, Direction, Lift, StopRule, Terminus, Trace};
pub use validate::{validate_f_gradient, ValidationReport, Witness};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("unknown scene family `{0}`")]
    UnknownFamily(String),
    #[error("invalid scene parameter `{name}`: {reason}")]
    BadParameter { name: String, reason: String },
    #[error("evaluation failure at {at:?}: {reason}")]
    EvaluationFailure { at: [f64; 3], reason: String },
    #[error("step size collapsed at {at:?}")]
    StepCollapse { at: [f64; 3] },
    #[error("maximum arc length exceeded at {at:?}")]
    MaxLengthExceeded { at: [f64; 3] },
    #[error("trace start {at:?} lies inside the trap ball of {id}")]
    StartInTrap { at: [f64; 3], id: String },
    #[error("critical point search failed: {0}")]
    CriticalSearch(String),
    #[error("perturbed field lost the f-gradient property (seed {seed}, delta {delta})")]
    ValidationLost { seed: u64, delta: f64 },
    #[error("operation needs a surface scene, got {0}")]
    NotASurface(String),
    #[error("{branch}: {source}")]
    Branch { branch: String, source: Box<FlowError> },
}

/// Numerical parameters shared by tracing and validation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Numerics {
    /// Trap radius around critical points.
    pub rho: f64,
    /// Offset of separatrix seeds from the saddle.
    pub eps: f64,
    /// Local error tolerance of the adaptive integrator.
    pub tol: f64,
    pub max_length: f64,
    /// Two critical points closer than this are reported as duplicates.
    pub merge_radius: f64,
    /// Samples per chart direction for condition A.
    pub grid: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self { rho: 1e-2, eps: 1e-3, tol: 1e-9, max_length: 1e3, merge_radius: 1e-6, grid: 64 }
    }
}

impl Numerics {
    pub fn with_tolerance_scale(mut self, s: f64) -> Self {
        self.tol *= s;
        self
    }
}
