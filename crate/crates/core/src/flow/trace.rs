use serde::{Deserialize, Serialize};

use super::geometry::{P3, V3};
use super::scene::FlowScene;
use super::FlowError;

/// Lift `p + shift` of a critical point in the universal cover of a flat
/// chart (shift `[0, 0]` on embedded surfaces).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Lift {
    pub id: String,
    pub shift: [i64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Along `-v`.
    Descending,
    /// Along `+v`.
    Ascending,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Descending => -1.0,
            Direction::Ascending => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize)]
pub struct StopRule {
    /// Stop on crossing this value of `f` (of the lift `F` for circle-valued scenes).
    pub level: Option<f64>,
    /// Critical lift whose trap ball is ignored until the trace first leaves it.
    pub origin: Option<Lift>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terminus {
    Critical { lift: Lift },
    Level { value: f64, point: P3 },
}

impl Terminus {
    pub fn critical(&self) -> Option<&Lift> {
        match self {
            Terminus::Critical { lift } => Some(lift),
            Terminus::Level { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trace {
    pub samples: Vec<P3>,
    pub arclength: Vec<f64>,
    pub values: Vec<f64>,
    pub terminus: Terminus,
}

fn unit_field(scene: &FlowScene, p: &P3, sign: f64) -> V3 {
    let v = scene.field(p);
    let n = v.norm();
    if n == 0.0 {
        V3::zeros()
    } else {
        v * (sign / n)
    }
}

fn rk4(scene: &FlowScene, p: &P3, h: f64, sign: f64) -> P3 {
    let k1 = unit_field(scene, p, sign);
    let k2 = unit_field(scene, &(p + k1 * (h / 2.0)), sign);
    let k3 = unit_field(scene, &(p + k2 * (h / 2.0)), sign);
    let k4 = unit_field(scene, &(p + k3 * h), sign);
    scene.retract(&(p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)))
}

/// Integrates `dx/ds = +-v / |v|` by RK4 with step doubling until the trace
/// enters a trap ball, crosses the stop level, or exceeds the maximal arc
/// length.
pub fn trace(scene: &FlowScene, start: &P3, dir: Direction, stop: &StopRule) -> Result<Trace, FlowError> {
    let num = *scene.numerics();
    let sign = dir.sign();
    let lat = scene.lattice();
    let cps = scene.critical_points();
    let origin = stop.origin.as_ref().and_then(|l| cps.iter().position(|c| c.id == l.id).map(|i| (i, l.shift)));
    let mut armed = origin.is_none();
    let start = scene.retract(start);
    if let Some((i, s, d)) = scene.nearest_critical(&start) {
        if d < num.rho && Some((i, s)) != origin {
            return Err(FlowError::StartInTrap { at: [start.x, start.y, start.z], id: cps[i].id.clone() });
        }
    }
    let mut p = start;
    let mut samples = vec![p];
    let mut values = vec![scene.f(&p)];
    let mut arclength = vec![0.0];
    let mut len = 0.0;
    let mut h = num.rho / 4.0;
    let crossed = |fv: f64, level: f64| if sign < 0.0 { fv <= level } else { fv >= level };
    loop {
        let near = scene.nearest_critical(&p);
        let d_near = near.map_or(f64::INFINITY, |x| x.2);
        let h_max = (d_near - num.rho).max(num.rho / 2.0).min(0.02);
        h = h.min(h_max);
        let (next, used) = loop {
            if h < 1e-13 {
                return Err(FlowError::StepCollapse { at: [p.x, p.y, p.z] });
            }
            let full = rk4(scene, &p, h, sign);
            let half = rk4(scene, &rk4(scene, &p, h / 2.0, sign), h / 2.0, sign);
            let err = (full - half).norm();
            if !err.is_finite() {
                return Err(FlowError::EvaluationFailure { at: [p.x, p.y, p.z], reason: "non-finite step".into() });
            }
            if err <= num.tol {
                let used = h;
                h *= if err == 0.0 { 2.0 } else { (0.9 * (num.tol / err).powf(0.2)).min(2.0) };
                break (half, used);
            }
            h *= (0.9 * (num.tol / err).powf(0.2)).max(0.1);
        };
        let fv = scene.f(&next);
        if let Some(level) = stop.level {
            if crossed(fv, level) {
                // bisect the last step for the crossing
                let (mut lo, mut hi) = (0.0, used);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let q = rk4(scene, &rk4(scene, &p, mid / 2.0, sign), mid / 2.0, sign);
                    if crossed(scene.f(&q), level) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                let q = rk4(scene, &rk4(scene, &p, hi / 2.0, sign), hi / 2.0, sign);
                len += hi;
                samples.push(q);
                values.push(scene.f(&q));
                arclength.push(len);
                return Ok(Trace { samples, arclength, values, terminus: Terminus::Level { value: level, point: q } });
            }
        }
        len += used;
        p = next;
        samples.push(p);
        values.push(fv);
        arclength.push(len);
        if let Some((i, s, d)) = scene.nearest_critical(&p) {
            if !armed {
                let (oi, os) = origin.unwrap();
                if (p - lat.shift(&cps[oi].position, os)).norm() > num.rho {
                    armed = true;
                }
            }
            if d < num.rho && (armed || Some((i, s)) != origin) {
                let lift = Lift { id: cps[i].id.clone(), shift: s };
                return Ok(Trace { samples, arclength, values, terminus: Terminus::Critical { lift } });
            }
        }
        if len > num.max_length {
            return Err(FlowError::MaxLengthExceeded { at: [p.x, p.y, p.z] });
        }
    }
}
