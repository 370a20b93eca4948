use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

pub type P3 = Vector3<f64>;
pub type V3 = Vector3<f64>;
pub type M3 = Matrix3<f64>;

/// Deck lattice of a flat chart. Points are traced in the universal cover
/// `R^2` (z = 0); the integer translations act with
/// `F(p + (a, b)) = F(p) + a * value_shift[0] + b * value_shift[1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Lattice {
    /// Embedded surface in `R^3`, no identifications.
    None,
    Square { value_shift: [f64; 2] },
}

impl Lattice {
    pub fn is_periodic(&self) -> bool {
        matches!(self, Lattice::Square { .. })
    }

    /// Splits `d` into a lattice vector and a remainder in `[-1/2, 1/2)^2`.
    pub fn reduce(&self, d: &V3) -> (V3, [i64; 2]) {
        match self {
            Lattice::None => (*d, [0, 0]),
            Lattice::Square { .. } => {
                let a = d.x.round();
                let b = d.y.round();
                (V3::new(d.x - a, d.y - b, d.z), [a as i64, b as i64])
            }
        }
    }

    pub fn shift(&self, p: &P3, s: [i64; 2]) -> P3 {
        match self {
            Lattice::None => *p,
            Lattice::Square { .. } => P3::new(p.x + s[0] as f64, p.y + s[1] as f64, p.z),
        }
    }

    pub fn value_shift(&self, s: [i64; 2]) -> f64 {
        match self {
            Lattice::None => 0.0,
            Lattice::Square { value_shift } => s[0] as f64 * value_shift[0] + s[1] as f64 * value_shift[1],
        }
    }
}

/// Orientation of the pair `(a, b)` of tangent vectors against the unit
/// normal `n`; on flat charts `n = e_z` and this is the planar determinant.
pub fn orient_det(a: &V3, b: &V3, n: &V3) -> f64 {
    a.cross(b).dot(n)
}

pub fn frame_coords(v: &V3, e1: &V3, e2: &V3) -> [f64; 2] {
    [v.dot(e1), v.dot(e2)]
}

/// Orthonormal tangent frame `(e1, e2)` with `e1 x e2 = n`. The first
/// vector comes from the coordinate axis least aligned with `n`.
pub fn tangent_frame(n: &V3) -> (V3, V3) {
    let axis = (0..3)
        .min_by(|&i, &j| n[i].abs().partial_cmp(&n[j].abs()).unwrap().then(i.cmp(&j)))
        .unwrap();
    let mut r = V3::zeros();
    r[axis] = 1.0;
    let e1 = (r - n * r.dot(n)).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}
