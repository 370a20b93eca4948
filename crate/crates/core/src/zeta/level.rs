use rayon::prelude::*;
use serde::Serialize;

use super::{FixedPoint, ZetaError};
use crate::flow::{trace, Direction, FlowError, FlowScene, StopRule, Terminus, P3};

pub const DEFAULT_RESOLUTION: usize = 4096;

/// Degeneracy threshold for derivatives estimated from traced maps.
const TRACED_DEGENERACY_TOL: f64 = 1e-3;

/// Return map of a circle-valued flat scene on the level `F = lambda`,
/// parameterized by the fiber coordinate `y`: descend from `V_lambda` to
/// `V_(lambda - 1)` and translate back by the deck generator. Samples are
/// the lifted images `Phi~(i / resolution)`, `None` where the trajectory
/// enters a trap ball.
#[derive(Clone, Debug, Serialize)]
pub struct ReturnMap {
    #[serde(skip)]
    scene: FlowScene,
    pub lambda: f64,
    pub resolution: usize,
    pub samples: Vec<Option<f64>>,
    /// Domain intervals as cyclic runs `[first, last]` of defined samples.
    pub intervals: Vec<(usize, usize)>,
    #[serde(skip)]
    label: Vec<Option<usize>>,
}

/// Point of `V_lambda` over the fiber coordinate `y`.
fn level_point(scene: &FlowScene, lambda: f64, y: f64) -> Result<P3, ZetaError> {
    let steps = 400;
    let (a, b) = (lambda - 1.5, lambda + 1.5);
    let g = |th: f64| scene.f(&P3::new(th, y, 0.0)) - lambda;
    let mut bracket = None;
    let mut changes = 0;
    let mut prev = (a, g(a));
    for i in 1..=steps {
        let th = a + (b - a) * i as f64 / steps as f64;
        let v = g(th);
        if (prev.1 < 0.0) != (v < 0.0) {
            changes += 1;
            bracket = Some((prev.0, th));
        }
        prev = (th, v);
    }
    let (Some((mut lo, mut hi)), 1) = (bracket, changes) else { return Err(ZetaError::LevelNotAGraph(lambda)) };
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(P3::new(0.5 * (lo + hi), y, 0.0))
}

fn exact_phi(scene: &FlowScene, lambda: f64, y: f64) -> Result<Option<f64>, ZetaError> {
    let p = level_point(scene, lambda, y)?;
    match trace(scene, &p, Direction::Descending, &StopRule { level: Some(lambda - 1.0), origin: None }) {
        Ok(t) => Ok(match t.terminus {
            Terminus::Level { point, .. } => Some(point.y),
            Terminus::Critical { .. } => None,
        }),
        Err(FlowError::StartInTrap { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn build_return_map(scene: &FlowScene, lambda: f64, resolution: usize) -> Result<ReturnMap, ZetaError> {
    if !scene.lattice().is_periodic() {
        return Err(ZetaError::NotApplicable(scene.family().to_string()));
    }
    let samples: Vec<Option<f64>> = (0..resolution)
        .into_par_iter()
        .map(|i| exact_phi(scene, lambda, i as f64 / resolution as f64))
        .collect::<Result<_, _>>()?;
    let n = resolution;
    let mut label = vec![None; n];
    let mut intervals = Vec::new();
    match samples.iter().position(Option::is_none) {
        None => {
            label.iter_mut().for_each(|l| *l = Some(0));
            intervals.push((0, n - 1));
        }
        Some(gap) => {
            let mut i = (gap + 1) % n;
            let mut current: Option<usize> = None;
            for _ in 0..n {
                if samples[i].is_some() {
                    let id = *current.get_or_insert_with(|| {
                        intervals.push((i, i));
                        intervals.len() - 1
                    });
                    intervals[id].1 = i;
                    label[i] = Some(id);
                } else {
                    current = None;
                }
                i = (i + 1) % n;
            }
        }
    }
    let rm = ReturnMap { scene: scene.clone(), lambda, resolution, samples, intervals, label };
    for i in 0..n {
        let j = (i + 1) % n;
        if let (Some(a), Some(b)) = (rm.sample_lift(i), rm.sample_lift_at(i + 1)) {
            if rm.label[i] == rm.label[j] && (b - a).abs() > 0.25 {
                return Err(ZetaError::ResolutionTooCoarse(format!("return map jumps by {:.3} between samples {i} and {j}", b - a)));
            }
        }
    }
    Ok(rm)
}

impl ReturnMap {
    fn sample_lift(&self, i: usize) -> Option<f64> {
        self.samples[i]
    }

    /// `Phi~` at the sample `i` of the universal cover, `i` unreduced.
    fn sample_lift_at(&self, i: usize) -> Option<f64> {
        let n = self.resolution;
        self.samples[i % n].map(|v| v + (i / n) as f64)
    }

    /// Interpolated `Phi~(y)` and the domain interval used.
    pub fn eval(&self, y: f64) -> Option<(f64, usize)> {
        let n = self.resolution;
        let u = y.rem_euclid(1.0);
        let base = y - u;
        let x = u * n as f64;
        let i = (x.floor() as usize).min(n - 1);
        let s = x - i as f64;
        let id = self.label[i]?;
        let same = |k: usize| self.label[k % n] == Some(id);
        if !same(i + 1) {
            return None;
        }
        let p1 = self.sample_lift_at(i)?;
        let p2 = self.sample_lift_at(i + 1)?;
        let v = if i >= 1 && same(i - 1) && same(i + 2) {
            // Catmull-Rom on the lifted samples
            let p0 = self.sample_lift_at(i - 1)?;
            let p3 = self.sample_lift_at(i + 2)?;
            0.5 * (2.0 * p1
                + (p2 - p0) * s
                + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * s * s
                + (3.0 * p1 - p0 - 3.0 * p2 + p3) * s * s * s)
        } else {
            p1 + (p2 - p1) * s
        };
        Some((v + base, id))
    }

    fn near_boundary(&self, y: f64) -> bool {
        let n = self.resolution;
        let i = (y.rem_euclid(1.0) * n as f64).floor() as usize;
        (0..5).any(|d| self.samples[(i + n + d - 2) % n].is_none())
    }

    /// `Phi~^n(y)` from interpolated samples with the itinerary of domain intervals.
    fn orbit(&self, y: f64, n: usize) -> Option<(f64, Vec<usize>)> {
        let mut x = y;
        let mut it = Vec::with_capacity(n);
        for _ in 0..n {
            let (v, id) = self.eval(x)?;
            it.push(id);
            x = v;
        }
        Some((x, it))
    }

    fn exact_orbit(&self, y: f64, n: usize) -> Result<Option<f64>, ZetaError> {
        let mut x = y;
        for _ in 0..n {
            let u = x.rem_euclid(1.0);
            match exact_phi(&self.scene, self.lambda, u)? {
                Some(v) => x = v + (x - u),
                None => return Ok(None),
            }
        }
        Ok(Some(x))
    }

    /// Fixed points of `Phi^n`: sign changes of `Phi~^n(y) - y - k` between
    /// samples with equal itineraries, refined by bisection on traced orbits.
    pub fn fixed_points(&self, n: usize) -> Result<Vec<FixedPoint>, ZetaError> {
        let r = self.resolution;
        let disp: Vec<Option<(f64, Vec<usize>)>> = (0..=r)
            .into_par_iter()
            .map(|i| {
                let y = i as f64 / r as f64;
                self.orbit(y, n).map(|(v, it)| (v - y, it))
            })
            .collect();
        let brackets: Vec<(usize, f64)> = (0..r)
            .flat_map(|i| {
                let (Some((d0, i0)), Some((d1, i1))) = (&disp[i], &disp[i + 1]) else { return Vec::new() };
                if i0 != i1 {
                    return Vec::new();
                }
                ((d0.min(*d1).floor() as i64)..=(d0.max(*d1).ceil() as i64))
                    .map(|k| k as f64)
                    .filter(|k| d0 - k == 0.0 || (d0 - k) * (d1 - k) < 0.0)
                    .map(|k| (i, k))
                    .collect()
            })
            .collect();
        if let Some(i) = (0..r).find(|&i| match (&disp[i], &disp[i + 1]) {
            (Some((d0, i0)), Some((d1, i1))) => i0 == i1 && (d1 - d0).abs() > 0.5,
            _ => false,
        }) {
            return Err(ZetaError::ResolutionTooCoarse(format!("displacement of iterate {n} jumps at sample {i}")));
        }
        brackets
            .par_iter()
            .map(|&(i, k)| {
                let (mut lo, mut hi) = (i as f64 / r as f64, (i + 1) as f64 / r as f64);
                let mut reliable = true;
                let f = |y: f64, reliable: &mut bool| -> Result<f64, ZetaError> {
                    Ok(match self.exact_orbit(y, n)? {
                        Some(v) => v - y - k,
                        None => {
                            *reliable = false;
                            self.orbit(y, n).map_or(f64::NAN, |o| o.0 - y - k)
                        }
                    })
                };
                let s_lo = f(lo, &mut reliable)?;
                let s_hi = f(hi, &mut reliable)?;
                if s_lo * s_hi > 0.0 {
                    // interpolation and traces disagree on the bracket
                    reliable = false;
                }
                for _ in 0..50 {
                    let mid = 0.5 * (lo + hi);
                    let sm = f(mid, &mut reliable)?;
                    if (sm < 0.0) == (s_lo < 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let x = 0.5 * (lo + hi);
                let h = 1e-5;
                let d = match (self.exact_orbit(x + h, n)?, self.exact_orbit(x - h, n)?) {
                    (Some(a), Some(b)) => (a - b) / (2.0 * h),
                    _ => {
                        reliable = false;
                        let (a, b) = (self.orbit(x + h, n), self.orbit(x - h, n));
                        a.zip(b).map_or(f64::NAN, |(a, b)| (a.0 - b.0) / (2.0 * h))
                    }
                };
                if !d.is_finite() || (d - 1.0).abs() < TRACED_DEGENERACY_TOL {
                    return Err(ZetaError::DegenerateFixedPoint { n, at: vec![x], reason: format!("derivative {d}") });
                }
                let mut y = x;
                for _ in 0..n {
                    reliable &= !self.near_boundary(y);
                    y = self.eval(y).map_or(y, |v| v.0);
                }
                Ok(FixedPoint { n, at: vec![x.rem_euclid(1.0)], derivative: d, index: (1.0 - d).signum() as i64, reliable })
            })
            .collect()
    }
}
