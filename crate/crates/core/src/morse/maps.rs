use serde::{Deserialize, Serialize};

use crate::flow::{FlowScene, P3};

/// General-position translation added to every map before intersection
/// counts, so that images of critical points avoid critical points.
pub const GENERIC_OFFSET: [f64; 2] = [2.71e-3, 1.37e-3];

/// Continuous self-map of a scene given in closed form on the chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceMap {
    Identity,
    /// `x -> M x + offset` on the universal cover of a flat chart.
    Affine { matrix: [[i64; 2]; 2], offset: [f64; 2] },
}

impl SurfaceMap {
    /// `identity`, `half_shift` (x + 1/2), `double_x`, `double_y` and
    /// `deck` (translation by -1 in the first coordinate).
    pub fn named(name: &str) -> Option<Self> {
        let affine = |matrix, offset| SurfaceMap::Affine { matrix, offset };
        Some(match name {
            "identity" => SurfaceMap::Identity,
            "half_shift" => affine([[1, 0], [0, 1]], [0.5, 0.0]),
            "double_x" => affine([[2, 0], [0, 1]], [0.137, 0.0]),
            "double_y" => affine([[1, 0], [0, 2]], [0.0, 0.137]),
            "deck" => affine([[1, 0], [0, 1]], [-1.0, 0.0]),
            _ => return None,
        })
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        match self {
            SurfaceMap::Identity => [[1, 0], [0, 1]],
            SurfaceMap::Affine { matrix, .. } => *matrix,
        }
    }

    pub fn offset(&self) -> [f64; 2] {
        match self {
            SurfaceMap::Identity => [0.0, 0.0],
            SurfaceMap::Affine { offset, .. } => *offset,
        }
    }

    pub fn det(&self) -> i64 {
        let m = self.matrix();
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn is_identity(&self) -> bool {
        self.matrix() == [[1, 0], [0, 1]] && self.offset() == [0.0, 0.0]
    }

    /// Whether the map is defined on the scene: affine maps need a flat
    /// chart, and on circle-valued scenes must commute with the deck
    /// translation in the first coordinate.
    pub fn supported_on(&self, scene: &FlowScene) -> bool {
        if self.is_identity() {
            return true;
        }
        if !scene.lattice().is_periodic() {
            return false;
        }
        scene.kind() != crate::flow::SceneKind::CircleValued || (self.matrix()[0] == [1, 0] && self.matrix()[1][0] == 0)
    }

    /// The map in general position, applied to chart coordinates.
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let m = self.matrix();
        let o = self.offset();
        [
            m[0][0] as f64 * p[0] + m[0][1] as f64 * p[1] + o[0] + GENERIC_OFFSET[0],
            m[1][0] as f64 * p[0] + m[1][1] as f64 * p[1] + o[1] + GENERIC_OFFSET[1],
        ]
    }

    pub fn apply3(&self, p: &P3) -> P3 {
        let q = self.apply([p.x, p.y]);
        P3::new(q[0], q[1], 0.0)
    }

    /// Solutions `x` of `apply(x) = y`.
    pub fn inverse_image(&self, y: [f64; 2]) -> [f64; 2] {
        let m = self.matrix();
        let o = self.offset();
        let d = self.det() as f64;
        let r = [y[0] - o[0] - GENERIC_OFFSET[0], y[1] - o[1] - GENERIC_OFFSET[1]];
        [
            (m[1][1] as f64 * r[0] - m[0][1] as f64 * r[1]) / d,
            (-(m[1][0] as f64) * r[0] + m[0][0] as f64 * r[1]) / d,
        ]
    }

    /// Lattice translate `M s` of a shift `s`.
    pub fn shift_image(&self, s: [i64; 2]) -> [i64; 2] {
        let m = self.matrix();
        [m[0][0] * s[0] + m[0][1] * s[1], m[1][0] * s[0] + m[1][1] * s[1]]
    }

    pub fn label(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}
