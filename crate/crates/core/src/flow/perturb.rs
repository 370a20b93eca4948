use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::geometry::{Lattice, P3, V3};
use super::scene::{FieldTweak, FlowScene};
use super::validate::validate_f_gradient;
use super::FlowError;

#[derive(Clone, Debug, PartialEq, Serialize)]
struct Mode {
    k: [i32; 3],
    phase: f64,
    amp: V3,
}

/// Pseudorandom trigonometric field of sup-norm at most `delta`, cut off by
/// a bump that vanishes within `2 rho` of every critical point. On flat
/// charts the frequencies are integral, so the field is deck-invariant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Perturbation {
    pub seed: u64,
    pub delta: f64,
    rho: f64,
    centers: Vec<P3>,
    modes: Vec<Mode>,
}

impl Perturbation {
    pub fn new(seed: u64, delta: f64, rho: f64, centers: Vec<P3>, flat: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 6;
        let mut modes: Vec<Mode> = (0..n)
            .map(|_| {
                let mut k = [rng.gen_range(-3..=3), rng.gen_range(-3..=3), rng.gen_range(-3..=3)];
                if flat {
                    k[2] = 0;
                }
                let mut amp = V3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if flat {
                    amp.z = 0.0;
                }
                Mode { k, phase: rng.gen_range(0.0..2.0 * PI), amp }
            })
            .collect();
        let total: f64 = modes.iter().map(|m| m.amp.norm()).sum();
        if total > 0.0 {
            for m in &mut modes {
                m.amp /= total;
            }
        }
        Self { seed, delta, rho, centers, modes }
    }

    fn cutoff(&self, p: &P3, lat: &Lattice) -> f64 {
        let d = self
            .centers
            .iter()
            .map(|c| lat.reduce(&(p - c)).0.norm())
            .fold(f64::INFINITY, f64::min);
        let s = ((d - 2.0 * self.rho) / (2.0 * self.rho)).clamp(0.0, 1.0);
        s * s * s * (s * (6.0 * s - 15.0) + 10.0)
    }

    pub fn eval(&self, p: &P3, lat: &Lattice) -> V3 {
        if self.delta == 0.0 {
            return V3::zeros();
        }
        let chi = self.cutoff(p, lat);
        if chi == 0.0 {
            return V3::zeros();
        }
        let mut w = V3::zeros();
        for m in &self.modes {
            let arg = 2.0 * PI * (m.k[0] as f64 * p.x + m.k[1] as f64 * p.y + m.k[2] as f64 * p.z) + m.phase;
            w += m.amp * arg.cos();
        }
        w * (self.delta * chi)
    }
}

/// Perturbs the field of a surface scene by a seeded field of sup-norm at
/// most `delta` and revalidates the f-gradient conditions.
pub fn perturb(scene: &FlowScene, seed: u64, delta: f64) -> Result<FlowScene, FlowError> {
    if delta == 0.0 {
        return Ok(scene.clone());
    }
    let centers = scene.critical_points().iter().map(|c| c.position).collect();
    let flat = scene.lattice().is_periodic();
    let w = Perturbation::new(seed, delta, scene.numerics().rho, centers, flat);
    let s = scene.with_tweak(FieldTweak::Perturb(w))?;
    if !validate_f_gradient(&s)?.pass {
        return Err(FlowError::ValidationLost { seed, delta });
    }
    Ok(s)
}
