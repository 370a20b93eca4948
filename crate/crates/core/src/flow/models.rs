use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use super::geometry::{Lattice, M3, P3, V3};
use super::scene::SceneKind;

const TAU: f64 = 2.0 * PI;

/// Closed-form Morse data on a surface: either a flat chart with a deck
/// lattice (z = 0) or the zero set of a constraint `G` in `R^3`.
pub trait SurfaceModel: Send + Sync + fmt::Debug {
    fn family(&self) -> &'static str;
    fn kind(&self) -> SceneKind;
    fn lattice(&self) -> Lattice;
    fn euler_characteristic(&self) -> i64;

    /// The Morse function (the real lift `F` for circle-valued scenes).
    fn f(&self, p: &P3) -> f64;
    fn grad_f(&self, p: &P3) -> V3;
    fn hess_f(&self, p: &P3) -> M3;

    /// `(G, grad G, hess G)` for implicit surfaces.
    fn constraint(&self, _p: &P3) -> Option<(f64, V3, M3)> {
        None
    }

    /// Unperturbed f-gradient; the default is the gradient for the
    /// Euclidean (induced) metric.
    fn field(&self, p: &P3) -> V3 {
        let g = self.grad_f(p);
        match self.constraint(p) {
            None => V3::new(g.x, g.y, 0.0),
            Some((_, dg, _)) => {
                let n = dg.normalize();
                g - n * g.dot(&n)
            }
        }
    }

    /// Approximate critical points, refined by Newton's method.
    fn critical_seeds(&self) -> Vec<P3>;

    /// Deterministic sample of surface points for condition A.
    fn samples(&self, res: usize) -> Vec<P3>;
}

fn flat_grid(res: usize) -> Vec<P3> {
    let mut out = Vec::with_capacity(res * res);
    for i in 0..res {
        for j in 0..res {
            out.push(P3::new((i as f64 + 0.5) / res as f64, (j as f64 + 0.5) / res as f64, 0.0));
        }
    }
    out
}

/// `f = a cos(2 pi m x) + b cos(2 pi y)` on the torus `R^2 / Z^2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorusProduct {
    pub a: f64,
    pub b: f64,
    pub m: u32,
}

impl SurfaceModel for TorusProduct {
    fn family(&self) -> &'static str {
        "torus_product"
    }
    fn kind(&self) -> SceneKind {
        SceneKind::RealValued
    }
    fn lattice(&self) -> Lattice {
        Lattice::Square { value_shift: [0.0, 0.0] }
    }
    fn euler_characteristic(&self) -> i64 {
        0
    }
    fn f(&self, p: &P3) -> f64 {
        let w = TAU * self.m as f64;
        self.a * (w * p.x).cos() + self.b * (TAU * p.y).cos()
    }
    fn grad_f(&self, p: &P3) -> V3 {
        let w = TAU * self.m as f64;
        V3::new(-w * self.a * (w * p.x).sin(), -TAU * self.b * (TAU * p.y).sin(), 0.0)
    }
    fn hess_f(&self, p: &P3) -> M3 {
        let w = TAU * self.m as f64;
        M3::from_diagonal(&V3::new(-w * w * self.a * (w * p.x).cos(), -TAU * TAU * self.b * (TAU * p.y).cos(), 0.0))
    }
    fn critical_seeds(&self) -> Vec<P3> {
        let mut out = Vec::new();
        for i in 0..2 * self.m {
            for j in 0..2 {
                out.push(P3::new(i as f64 / (2 * self.m) as f64, j as f64 / 2.0, 0.0));
            }
        }
        out
    }
    fn samples(&self, res: usize) -> Vec<P3> {
        flat_grid(res)
    }
}

/// Height `z` on the unit sphere.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SphereHeight;

impl SurfaceModel for SphereHeight {
    fn family(&self) -> &'static str {
        "sphere_height"
    }
    fn kind(&self) -> SceneKind {
        SceneKind::RealValued
    }
    fn lattice(&self) -> Lattice {
        Lattice::None
    }
    fn euler_characteristic(&self) -> i64 {
        2
    }
    fn f(&self, p: &P3) -> f64 {
        p.z
    }
    fn grad_f(&self, _p: &P3) -> V3 {
        V3::new(0.0, 0.0, 1.0)
    }
    fn hess_f(&self, _p: &P3) -> M3 {
        M3::zeros()
    }
    fn constraint(&self, p: &P3) -> Option<(f64, V3, M3)> {
        Some((p.norm_squared() - 1.0, 2.0 * p, 2.0 * M3::identity()))
    }
    fn critical_seeds(&self) -> Vec<P3> {
        vec![P3::new(0.0, 0.0, -1.0), P3::new(0.0, 0.0, 1.0)]
    }
    fn samples(&self, res: usize) -> Vec<P3> {
        let mut out = Vec::new();
        for i in 0..res {
            let th = PI * (i as f64 + 0.5) / res as f64;
            for j in 0..2 * res {
                let ph = PI * j as f64 / res as f64;
                out.push(P3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()));
            }
        }
        out
    }
}

/// Tilted height `x + ty y + tz z` on the genus-two surface
/// `q(x, y)^2 + z^2 = r^2`, `q = x (x-1)^2 (x-2) + y^2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Genus2Height {
    pub r: f64,
    pub tilt: [f64; 2],
}

impl Genus2Height {
    /// `q` and its first and second partials `(q_x, q_y, q_xx)`; `q_yy = 2`.
    fn q(&self, p: &P3) -> (f64, f64, f64, f64) {
        let u = p.x * p.x - 2.0 * p.x;
        let du = 2.0 * p.x - 2.0;
        let q = u * u + u + p.y * p.y;
        let qx = (2.0 * u + 1.0) * du;
        let qxx = 2.0 * du * du + 2.0 * (2.0 * u + 1.0);
        (q, qx, 2.0 * p.y, qxx)
    }

    /// Roots of `x (x-1)^2 (x-2) = c`, i.e. `u^2 + u = c` with `u = x^2 - 2x`.
    fn roots(c: f64) -> Vec<f64> {
        let disc = 1.0 + 4.0 * c;
        let mut out = Vec::new();
        for u in [(-1.0 - disc.sqrt()) / 2.0, (-1.0 + disc.sqrt()) / 2.0] {
            if 1.0 + u >= 0.0 {
                let s = (1.0 + u).sqrt();
                out.push(1.0 - s);
                out.push(1.0 + s);
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    fn x_range(&self) -> (f64, f64) {
        let r = Self::roots(self.r);
        (r[0], r[r.len() - 1])
    }
}

impl SurfaceModel for Genus2Height {
    fn family(&self) -> &'static str {
        "genus2_height"
    }
    fn kind(&self) -> SceneKind {
        SceneKind::RealValued
    }
    fn lattice(&self) -> Lattice {
        Lattice::None
    }
    fn euler_characteristic(&self) -> i64 {
        -2
    }
    fn f(&self, p: &P3) -> f64 {
        p.x + self.tilt[0] * p.y + self.tilt[1] * p.z
    }
    fn grad_f(&self, _p: &P3) -> V3 {
        V3::new(1.0, self.tilt[0], self.tilt[1])
    }
    fn hess_f(&self, _p: &P3) -> M3 {
        M3::zeros()
    }
    fn constraint(&self, p: &P3) -> Option<(f64, V3, M3)> {
        let (q, qx, qy, qxx) = self.q(p);
        let g = q * q + p.z * p.z - self.r * self.r;
        let dg = V3::new(2.0 * q * qx, 2.0 * q * qy, 2.0 * p.z);
        let h = M3::new(
            2.0 * (qx * qx + q * qxx),
            2.0 * qx * qy,
            0.0,
            2.0 * qx * qy,
            2.0 * (qy * qy + 2.0 * q),
            0.0,
            0.0,
            0.0,
            2.0,
        );
        Some((g, dg, h))
    }
    fn critical_seeds(&self) -> Vec<P3> {
        // untilted critical points lie on y = z = 0 where q = +-r
        let mut xs = Self::roots(self.r);
        xs.extend(Self::roots(-self.r));
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.into_iter().map(|x| P3::new(x, 0.0, 0.0)).collect()
    }
    fn samples(&self, res: usize) -> Vec<P3> {
        let (x0, x1) = self.x_range();
        let ymax = (self.r + 0.25).sqrt();
        let mut out = Vec::new();
        for i in 0..=4 * res {
            let x = x0 + (x1 - x0) * i as f64 / (4 * res) as f64;
            for j in 0..=2 * res {
                let y = -ymax + 2.0 * ymax * j as f64 / (2 * res) as f64;
                let (q, ..) = self.q(&P3::new(x, y, 0.0));
                let z2 = self.r * self.r - q * q;
                if z2 > 0.0 {
                    out.push(P3::new(x, y, z2.sqrt()));
                    out.push(P3::new(x, y, -z2.sqrt()));
                }
            }
        }
        out
    }
}

/// Circle-valued map on the torus with lift
/// `F(th, y) = th + c (1 - cos 2 pi k th)^2 (1 + cos 2 pi y) / 2`
/// and the f-gradient `v = (F_th, F_y + s F_th)`. The deck generator is
/// `th -> th - 1`; `k = 0` is the fibration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorusCircleValued {
    pub k: u32,
    pub c: f64,
    pub drift: f64,
}

impl TorusCircleValued {
    /// `(h, h', h'')` for `h(th) = (1 - cos 2 pi k th)^2`.
    fn h(&self, th: f64) -> (f64, f64, f64) {
        let w = TAU * self.k as f64;
        let (s, c) = (w * th).sin_cos();
        let one_c = 1.0 - c;
        (one_c * one_c, 2.0 * one_c * w * s, 2.0 * (w * s).powi(2) + 2.0 * one_c * w * w * c)
    }

    fn g(&self, y: f64) -> (f64, f64, f64) {
        let (s, c) = (TAU * y).sin_cos();
        ((1.0 + c) / 2.0, -PI * s, -2.0 * PI * PI * c)
    }
}

impl SurfaceModel for TorusCircleValued {
    fn family(&self) -> &'static str {
        "torus_circle_valued"
    }
    fn kind(&self) -> SceneKind {
        SceneKind::CircleValued
    }
    fn lattice(&self) -> Lattice {
        Lattice::Square { value_shift: [1.0, 0.0] }
    }
    fn euler_characteristic(&self) -> i64 {
        0
    }
    fn f(&self, p: &P3) -> f64 {
        p.x + self.c * self.h(p.x).0 * self.g(p.y).0
    }
    fn grad_f(&self, p: &P3) -> V3 {
        let (h, dh, _) = self.h(p.x);
        let (g, dg, _) = self.g(p.y);
        V3::new(1.0 + self.c * dh * g, self.c * h * dg, 0.0)
    }
    fn hess_f(&self, p: &P3) -> M3 {
        let (h, dh, ddh) = self.h(p.x);
        let (g, dg, ddg) = self.g(p.y);
        let c = self.c;
        M3::new(c * ddh * g, c * dh * dg, 0.0, c * dh * dg, c * h * ddg, 0.0, 0.0, 0.0, 0.0)
    }
    fn field(&self, p: &P3) -> V3 {
        let g = self.grad_f(p);
        V3::new(g.x, g.y + self.drift * g.x, 0.0)
    }
    fn critical_seeds(&self) -> Vec<P3> {
        if self.k == 0 {
            return Vec::new();
        }
        // zeros of F_th along y = 0, bracketed on a fine grid of one period
        let period = 1.0 / self.k as f64;
        let fth = |th: f64| 1.0 + self.c * self.h(th).1;
        let n = 4000;
        let mut roots = Vec::new();
        for i in 0..n {
            let (a, b) = (period * i as f64 / n as f64, period * (i + 1) as f64 / n as f64);
            if fth(a) * fth(b) < 0.0 {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if fth(lo) * fth(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
        let mut out = Vec::new();
        for j in 0..self.k {
            for r in &roots {
                out.push(P3::new(r + j as f64 * period, 0.0, 0.0));
            }
        }
        out
    }
    fn samples(&self, res: usize) -> Vec<P3> {
        flat_grid(res)
    }
}

/// Torus function with two saddles joined by the invariant line `x = 0`:
/// `f = sin(2 pi y) (cos 2 pi x - 1) + cos(2 pi (y - y0))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaddleConnection {
    pub y0: f64,
}

impl SurfaceModel for SaddleConnection {
    fn family(&self) -> &'static str {
        "saddle_connection"
    }
    fn kind(&self) -> SceneKind {
        SceneKind::RealValued
    }
    fn lattice(&self) -> Lattice {
        Lattice::Square { value_shift: [0.0, 0.0] }
    }
    fn euler_characteristic(&self) -> i64 {
        0
    }
    fn f(&self, p: &P3) -> f64 {
        (TAU * p.y).sin() * ((TAU * p.x).cos() - 1.0) + (TAU * (p.y - self.y0)).cos()
    }
    fn grad_f(&self, p: &P3) -> V3 {
        let (sx, cx) = (TAU * p.x).sin_cos();
        let (sy, cy) = (TAU * p.y).sin_cos();
        let s0 = (TAU * (p.y - self.y0)).sin();
        V3::new(-TAU * sy * sx, TAU * cy * (cx - 1.0) - TAU * s0, 0.0)
    }
    fn hess_f(&self, p: &P3) -> M3 {
        let (sx, cx) = (TAU * p.x).sin_cos();
        let (sy, cy) = (TAU * p.y).sin_cos();
        let c0 = (TAU * (p.y - self.y0)).cos();
        let t2 = TAU * TAU;
        M3::new(
            -t2 * sy * cx,
            -t2 * cy * sx,
            0.0,
            -t2 * cy * sx,
            -t2 * sy * (cx - 1.0) - t2 * c0,
            0.0,
            0.0,
            0.0,
            0.0,
        )
    }
    fn critical_seeds(&self) -> Vec<P3> {
        // saddles on x = 0 at y0 and y0 - 1/2; extrema on x = 1/2 where
        // tan(2 pi y) solves the one-variable critical equation
        let y0 = self.y0;
        let g = |y: f64| -2.0 * (TAU * y).cos() - (TAU * (y - y0)).sin();
        let mut out = vec![P3::new(0.0, y0, 0.0), P3::new(0.0, (y0 - 0.5).rem_euclid(1.0), 0.0)];
        let n = 2000;
        for i in 0..n {
            let (a, b) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
            if g(a) * g(b) < 0.0 {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if g(lo) * g(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                out.push(P3::new(0.5, 0.5 * (lo + hi), 0.0));
            }
        }
        out
    }
    fn samples(&self, res: usize) -> Vec<P3> {
        flat_grid(res)
    }
}

/// Monodromy of a mapping-torus scene, acting on the fiber's universal
/// cover.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "fiber", rename_all = "snake_case")]
pub enum FiberMap {
    /// `g(x) = d x + (a / 2 pi) sin 2 pi x` on `R / Z`, `|a| < 1`.
    Circle { degree: i64, a: f64 },
    /// Linear map of `R^2 / Z^2` given by an integer matrix.
    Torus { matrix: [[i64; 2]; 2] },
}

impl FiberMap {
    pub fn fiber_dim(&self) -> usize {
        match self {
            FiberMap::Circle { .. } => 1,
            FiberMap::Torus { .. } => 2,
        }
    }

    /// The lift `g~` on the universal cover of the fiber.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            FiberMap::Circle { degree, a } => vec![*degree as f64 * x[0] + a / TAU * (TAU * x[0]).sin()],
            FiberMap::Torus { matrix: m } => vec![
                m[0][0] as f64 * x[0] + m[0][1] as f64 * x[1],
                m[1][0] as f64 * x[0] + m[1][1] as f64 * x[1],
            ],
        }
    }

    /// Row-major Jacobian of the lift.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        match self {
            FiberMap::Circle { degree, a } => vec![vec![*degree as f64 + a * (TAU * x[0]).cos()]],
            FiberMap::Torus { matrix: m } => {
                m.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect()
            }
        }
    }

    /// Action on the integral homology of the fiber in degrees 0, 1, 2
    /// (degree 2 only for the torus).
    pub fn homology_action(&self) -> Vec<Vec<Vec<i64>>> {
        match self {
            FiberMap::Circle { degree, .. } => vec![vec![vec![1]], vec![vec![*degree]]],
            FiberMap::Torus { matrix: m } => vec![
                vec![vec![1]],
                vec![m[0].to_vec(), m[1].to_vec()],
                vec![vec![m[0][0] * m[1][1] - m[0][1] * m[1][0]]],
            ],
        }
    }
}
