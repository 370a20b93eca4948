use nalgebra::{Matrix2, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use super::geometry::P3;
use super::scene::FlowScene;
use super::FlowError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub at: P3,
    /// `f'(x)(v(x))` for condition A, the smallest eigenvalue for B.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointCheck {
    pub id: String,
    pub eigenvalues: [f64; 2],
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub a_violations: usize,
    /// Sample with the smallest `f'(x)(v(x))`.
    pub a_witness: Option<Witness>,
    pub condition_a: bool,
    pub b_checks: Vec<PointCheck>,
    pub condition_b: bool,
    pub pass: bool,
}

/// Checks that `v` is an f-gradient: (A) `f'(x)(v(x)) > 0` on a grid away
/// from the trap balls, and (B) the symmetrized form
/// `h -> f''(p)(v'(p) h, h)` is positive definite at every critical point.
pub fn validate_f_gradient(scene: &FlowScene) -> Result<ValidationReport, FlowError> {
    let model = scene.model()?;
    let num = scene.numerics();
    let samples: Vec<P3> = model
        .samples(num.grid)
        .into_iter()
        .filter(|p| scene.nearest_critical(p).is_none_or(|(_, _, d)| d > num.rho))
        .collect();
    let values: Vec<(P3, f64)> = samples
        .par_iter()
        .map(|p| (*p, scene.grad_f(p).dot(&scene.field(p))))
        .collect();
    if let Some((p, _)) = values.iter().find(|(_, v)| !v.is_finite()) {
        return Err(FlowError::EvaluationFailure { at: [p.x, p.y, p.z], reason: "non-finite f'(v)".into() });
    }
    let a_violations = values.iter().filter(|(_, v)| *v <= 0.0).count();
    let a_witness = values
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(p, v)| Witness { at: *p, value: *v });
    let mut b_checks = Vec::new();
    for c in scene.critical_points() {
        let j = Matrix2::new(c.jacobian[0][0], c.jacobian[0][1], c.jacobian[1][0], c.jacobian[1][1]);
        let h = Matrix2::new(c.hessian[0][0], c.hessian[0][1], c.hessian[1][0], c.hessian[1][1]);
        let form = j.transpose() * h;
        let sym = (form + form.transpose()) * 0.5;
        let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let scale = sym.norm().max(1.0);
        b_checks.push(PointCheck { id: c.id.clone(), eigenvalues: [ev[0], ev[1]], pass: ev[0] > 1e-9 * scale });
    }
    let condition_a = a_violations == 0;
    let condition_b = b_checks.iter().all(|c| c.pass);
    Ok(ValidationReport {
        samples: values.len(),
        a_violations,
        a_witness,
        condition_a,
        b_checks,
        condition_b,
        pass: condition_a && condition_b,
    })
}
