use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::geometry::{tangent_frame, Lattice, M3, P3, V3};
use super::models::{
    FiberMap, Genus2Height, SaddleConnection, SphereHeight, SurfaceModel, TorusCircleValued, TorusProduct,
};
use super::perturb::Perturbation;
use super::{FlowError, Numerics};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneKind {
    RealValued,
    CircleValued,
    MappingTorus,
}

/// Serialized scene reference: `{family, params, overrides}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub overrides: Numerics,
}

impl SceneSpec {
    pub fn new(family: &str) -> Self {
        Self { family: family.into(), params: BTreeMap::new(), overrides: Numerics::default() }
    }

    pub fn with(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.params.insert(key.into(), v.into());
        self
    }

    /// Shipped scenes by name. Family names give the family defaults.
    pub fn named(name: &str) -> Result<Self, FlowError> {
        let s = match name {
            "sphere_height" | "torus_product" | "genus2_height" | "torus_circle_valued" | "saddle_connection"
            | "mapping_torus" => Self::new(name),
            "torus_product_m2" => Self::new("torus_product").with("m", 2),
            "torus_fibration" => Self::new("torus_circle_valued").with("k", 0),
            "trivial_fibration" => Self::new("torus_circle_valued").with("k", 0).with("drift", 0.0),
            "cat_map" => Self::new("mapping_torus").with("fiber", "torus").with("matrix", serde_json::json!([[2, 1], [1, 1]])),
            "circle_doubling" => Self::new("mapping_torus").with("fiber", "circle").with("degree", 2).with("a", 0.3),
            other => return Err(FlowError::UnknownFamily(other.into())),
        };
        Ok(s)
    }

    fn num(&self, key: &str, default: f64) -> Result<f64, FlowError> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| FlowError::BadParameter { name: key.into(), reason: "expected a number".into() }),
        }
    }

    fn int(&self, key: &str, default: i64) -> Result<i64, FlowError> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.as_i64().ok_or_else(|| FlowError::BadParameter { name: key.into(), reason: "expected an integer".into() }),
        }
    }

    fn text(&self, key: &str, default: &str) -> Result<String, FlowError> {
        match self.params.get(key) {
            None => Ok(default.into()),
            Some(v) => v
                .as_str()
                .map(str::to_owned)
                .ok_or_else(|| FlowError::BadParameter { name: key.into(), reason: "expected a string".into() }),
        }
    }
}

/// Modifications of the unperturbed field.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "tweak", rename_all = "snake_case")]
pub enum FieldTweak {
    Negate,
    /// Adds `kappa * chi(|p - c|) * J(p - c)` with `J` the quarter turn of
    /// the tangent plane and `chi` a bump of the given radius.
    RotateSaddle { center: P3, kappa: f64, radius: f64 },
    Perturb(Perturbation),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub id: String,
    pub index: usize,
    pub position: P3,
    pub value: f64,
    pub normal: V3,
    /// Oriented orthonormal tangent frame.
    pub frame: [V3; 2],
    /// `v'(p)` in frame coordinates.
    pub jacobian: [[f64; 2]; 2],
    /// Intrinsic Hessian of `f` in frame coordinates.
    pub hessian: [[f64; 2]; 2],
    /// Ordered basis of the descending directions: empty for minima,
    /// `[e]` for saddles, the frame for maxima.
    pub orientation: Vec<V3>,
    /// Ascending direction `a` of a saddle with `(e, a)` positively oriented.
    pub ascending: Option<V3>,
}

impl CriticalPoint {
    pub fn descending(&self) -> Option<V3> {
        (self.index == 1).then(|| self.orientation[0])
    }
}

#[derive(Clone, Debug)]
enum Body {
    Surface { model: Arc<dyn SurfaceModel>, tweaks: Vec<FieldTweak>, critical: Vec<CriticalPoint> },
    MappingTorus { fiber: FiberMap },
}

#[derive(Clone, Debug)]
pub struct FlowScene {
    spec: SceneSpec,
    body: Body,
}

fn smooth_step(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (s * (6.0 * s - 15.0) + 10.0)
}

impl FlowScene {
    pub fn named(name: &str) -> Result<Self, FlowError> {
        Self::from_spec(SceneSpec::named(name)?)
    }

    pub fn from_json(text: &str) -> Result<Self, FlowError> {
        let spec: SceneSpec = serde_json::from_str(text)
            .map_err(|e| FlowError::BadParameter { name: "scene".into(), reason: e.to_string() })?;
        Self::from_spec(spec)
    }

    pub fn from_spec(spec: SceneSpec) -> Result<Self, FlowError> {
        let model: Arc<dyn SurfaceModel> = match spec.family.as_str() {
            "sphere_height" => Arc::new(SphereHeight),
            "torus_product" => {
                let (a, b) = (spec.num("a", 1.0)?, spec.num("b", 0.5)?);
                let m = spec.int("m", 1)?;
                if m < 1 || a <= 0.0 || b <= 0.0 || a == b {
                    return Err(FlowError::BadParameter { name: "a, b, m".into(), reason: "need a != b positive, m >= 1".into() });
                }
                Arc::new(TorusProduct { a, b, m: m as u32 })
            }
            "genus2_height" => {
                let r = spec.num("r", 0.1)?;
                if !(0.0 < r && r < 0.25) {
                    return Err(FlowError::BadParameter { name: "r".into(), reason: "need 0 < r < 1/4".into() });
                }
                Arc::new(Genus2Height { r, tilt: [spec.num("tilt_y", 0.1)?, spec.num("tilt_z", 0.07)?] })
            }
            "torus_circle_valued" => {
                let k = spec.int("k", 1)?;
                let c = spec.num("c", 0.1)?;
                let drift = spec.num("drift", 0.3)?;
                if k < 0 || drift.abs() >= 2.0 {
                    return Err(FlowError::BadParameter { name: "k, drift".into(), reason: "need k >= 0, |drift| < 2".into() });
                }
                Arc::new(TorusCircleValued { k: k as u32, c, drift })
            }
            "saddle_connection" => Arc::new(SaddleConnection { y0: spec.num("y0", 0.7)? }),
            "mapping_torus" => {
                let fiber = match spec.text("fiber", "torus")?.as_str() {
                    "torus" => {
                        let m = spec.params.get("matrix").cloned().unwrap_or(serde_json::json!([[2, 1], [1, 1]]));
                        let matrix: [[i64; 2]; 2] = serde_json::from_value(m)
                            .map_err(|e| FlowError::BadParameter { name: "matrix".into(), reason: e.to_string() })?;
                        if matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0] != 1 {
                            return Err(FlowError::BadParameter { name: "matrix".into(), reason: "monodromy must lie in SL2(Z)".into() });
                        }
                        FiberMap::Torus { matrix }
                    }
                    "circle" => {
                        let degree = spec.int("degree", 2)?;
                        let a = spec.num("a", 0.3)?;
                        if a.abs() >= 1.0 || degree.abs() < 2 {
                            return Err(FlowError::BadParameter { name: "degree, a".into(), reason: "need |degree| >= 2, |a| < 1".into() });
                        }
                        FiberMap::Circle { degree, a }
                    }
                    other => return Err(FlowError::BadParameter { name: "fiber".into(), reason: format!("unknown fiber `{other}`") }),
                };
                return Ok(Self { spec, body: Body::MappingTorus { fiber } });
            }
            other => return Err(FlowError::UnknownFamily(other.into())),
        };
        let mut scene = Self { spec, body: Body::Surface { model, tweaks: Vec::new(), critical: Vec::new() } };
        scene.locate_critical_points(None)?;
        Ok(scene)
    }

    pub fn spec(&self) -> &SceneSpec {
        &self.spec
    }

    pub fn numerics(&self) -> &Numerics {
        &self.spec.overrides
    }

    pub fn with_numerics(&self, n: Numerics) -> Self {
        let mut s = self.clone();
        s.spec.overrides = n;
        s
    }

    pub fn family(&self) -> &str {
        &self.spec.family
    }

    pub fn kind(&self) -> SceneKind {
        match &self.body {
            Body::Surface { model, .. } => model.kind(),
            Body::MappingTorus { .. } => SceneKind::MappingTorus,
        }
    }

    pub fn model(&self) -> Result<&dyn SurfaceModel, FlowError> {
        match &self.body {
            Body::Surface { model, .. } => Ok(model.as_ref()),
            Body::MappingTorus { .. } => Err(FlowError::NotASurface(self.spec.family.clone())),
        }
    }

    fn surface(&self) -> &dyn SurfaceModel {
        self.model().expect("surface scene")
    }

    pub fn fiber_map(&self) -> Option<&FiberMap> {
        match &self.body {
            Body::MappingTorus { fiber } => Some(fiber),
            Body::Surface { .. } => None,
        }
    }

    pub fn tweaks(&self) -> &[FieldTweak] {
        match &self.body {
            Body::Surface { tweaks, .. } => tweaks,
            Body::MappingTorus { .. } => &[],
        }
    }

    pub fn critical_points(&self) -> &[CriticalPoint] {
        match &self.body {
            Body::Surface { critical, .. } => critical,
            Body::MappingTorus { .. } => &[],
        }
    }

    pub fn critical(&self, id: &str) -> Option<&CriticalPoint> {
        self.critical_points().iter().find(|c| c.id == id)
    }

    pub fn critical_of_index(&self, k: usize) -> Vec<&CriticalPoint> {
        self.critical_points().iter().filter(|c| c.index == k).collect()
    }

    pub fn lattice(&self) -> Lattice {
        match &self.body {
            Body::Surface { model, .. } => model.lattice(),
            Body::MappingTorus { .. } => Lattice::None,
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        match &self.body {
            Body::Surface { model, .. } => model.euler_characteristic(),
            Body::MappingTorus { .. } => 0,
        }
    }

    /// Adds a field modification and recomputes the critical data.
    pub fn with_tweak(&self, t: FieldTweak) -> Result<Self, FlowError> {
        let mut s = self.clone();
        let positions: Vec<P3> = self.critical_points().iter().map(|c| c.position).collect();
        match &mut s.body {
            Body::Surface { tweaks, .. } => tweaks.push(t),
            Body::MappingTorus { .. } => return Err(FlowError::NotASurface(self.spec.family.clone())),
        }
        s.locate_critical_points(Some(positions))?;
        Ok(s)
    }

    pub fn f(&self, p: &P3) -> f64 {
        self.surface().f(p)
    }

    pub fn grad_f(&self, p: &P3) -> V3 {
        self.surface().grad_f(p)
    }

    /// Unit normal of the surface at `p` (`e_z` on flat charts).
    pub fn normal(&self, p: &P3) -> V3 {
        match self.surface().constraint(p) {
            None => V3::new(0.0, 0.0, 1.0),
            Some((_, dg, _)) => dg.normalize(),
        }
    }

    pub fn frame(&self, p: &P3) -> (V3, V3) {
        tangent_frame(&self.normal(p))
    }

    /// Newton projection onto the surface along the constraint gradient.
    pub fn retract(&self, p: &P3) -> P3 {
        let m = self.surface();
        let mut q = *p;
        for _ in 0..30 {
            let Some((g, dg, _)) = m.constraint(&q) else { return q };
            if g.abs() < 1e-15 {
                break;
            }
            q -= dg * (g / dg.norm_squared());
        }
        q
    }

    /// The f-gradient `v`, including all tweaks.
    pub fn field(&self, p: &P3) -> V3 {
        let Body::Surface { model, tweaks, .. } = &self.body else {
            return V3::zeros();
        };
        let mut v = model.field(p);
        for t in tweaks {
            match t {
                FieldTweak::Negate => v = -v,
                FieldTweak::RotateSaddle { center, kappa, radius } => {
                    let d = p - center;
                    let (d, _) = model.lattice().reduce(&d);
                    let chi = 1.0 - smooth_step((d.norm() / radius - 0.5) * 2.0);
                    if chi > 0.0 {
                        let n = self.normal(p);
                        v += n.cross(&d) * (kappa * chi);
                    }
                }
                FieldTweak::Perturb(w) => {
                    let mut dw = w.eval(p, &model.lattice());
                    if model.constraint(p).is_some() {
                        let n = self.normal(p);
                        dw -= n * dw.dot(&n);
                    }
                    v += dw;
                }
            }
        }
        v
    }

    /// `v'(p)` in the frame `(e1, e2)` by central differences along the surface.
    pub fn field_jacobian(&self, p: &P3, e1: &V3, e2: &V3) -> Matrix2<f64> {
        let h = 1e-6;
        let mut j = Matrix2::zeros();
        for (col, e) in [e1, e2].into_iter().enumerate() {
            let vp = self.field(&self.retract(&(p + e * h)));
            let vm = self.field(&self.retract(&(p - e * h)));
            let dv = (vp - vm) / (2.0 * h);
            j[(0, col)] = dv.dot(e1);
            j[(1, col)] = dv.dot(e2);
        }
        j
    }

    /// Intrinsic Hessian of `f` at a critical point, in frame coordinates.
    pub fn intrinsic_hessian(&self, p: &P3, e1: &V3, e2: &V3) -> Matrix2<f64> {
        let m = self.surface();
        let mut h: M3 = m.hess_f(p);
        if let Some((_, dg, hg)) = m.constraint(p) {
            let mu = m.grad_f(p).dot(&dg) / dg.norm_squared();
            h -= hg * mu;
        }
        let e = [e1, e2];
        Matrix2::from_fn(|i, j| e[i].dot(&(h * e[j])))
    }

    /// Nearest critical lift to `p`: `(index into critical_points, lattice shift, distance)`.
    pub fn nearest_critical(&self, p: &P3) -> Option<(usize, [i64; 2], f64)> {
        let lat = self.lattice();
        self.critical_points()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let (r, s) = lat.reduce(&(p - c.position));
                (i, s, r.norm())
            })
            .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap().then(a.0.cmp(&b.0)))
    }

    fn newton(&self, seed: &P3) -> Result<P3, FlowError> {
        let mut p = self.retract(seed);
        for _ in 0..60 {
            let (e1, e2) = self.frame(&p);
            let v = self.field(&p);
            let r = Vector2::new(v.dot(&e1), v.dot(&e2));
            if r.norm() < 1e-13 {
                return Ok(p);
            }
            let j = self.field_jacobian(&p, &e1, &e2);
            let Some(inv) = j.try_inverse() else {
                return Err(FlowError::CriticalSearch(format!("singular Jacobian near {:?}", p.as_slice())));
            };
            let d = inv * r;
            p = self.retract(&(p - e1 * d[0] - e2 * d[1]));
        }
        let v = self.field(&p);
        if v.norm() < 1e-9 {
            Ok(p)
        } else {
            Err(FlowError::CriticalSearch(format!("Newton did not converge from {:?}", seed.as_slice())))
        }
    }

    fn locate_critical_points(&mut self, seeds: Option<Vec<P3>>) -> Result<(), FlowError> {
        let Body::Surface { model, .. } = &self.body else { return Ok(()) };
        let seeds = seeds.unwrap_or_else(|| model.critical_seeds());
        let lat = model.lattice();
        let merge = self.numerics().merge_radius;
        let mut found: Vec<P3> = Vec::new();
        for s in &seeds {
            let mut p = self.newton(s)?;
            if lat.is_periodic() {
                p = P3::new(p.x.rem_euclid(1.0), p.y.rem_euclid(1.0), 0.0);
                // keep coordinates that round to 1 at 0
                if p.x > 1.0 - 1e-12 {
                    p.x = 0.0;
                }
                if p.y > 1.0 - 1e-12 {
                    p.y = 0.0;
                }
            }
            if found.iter().any(|q| lat.reduce(&(p - q)).0.norm() < merge) {
                return Err(FlowError::CriticalSearch(format!("duplicate critical point at {:?}", p.as_slice())));
            }
            found.push(p);
        }
        let mut cps: Vec<CriticalPoint> = found.iter().map(|p| self.critical_data(p)).collect();
        cps.sort_by(|a, b| {
            (a.index, a.value, a.position.x, a.position.y, a.position.z)
                .partial_cmp(&(b.index, b.value, b.position.x, b.position.y, b.position.z))
                .unwrap()
        });
        let mut counters = [0usize; 3];
        for c in &mut cps {
            let prefix = ["min", "saddle", "max"][c.index];
            c.id = format!("{prefix}{}", counters[c.index]);
            counters[c.index] += 1;
        }
        if let Body::Surface { critical, .. } = &mut self.body {
            *critical = cps;
        }
        Ok(())
    }

    fn critical_data(&self, p: &P3) -> CriticalPoint {
        let n = self.normal(p);
        let (e1, e2) = self.frame(p);
        let j = self.field_jacobian(p, &e1, &e2);
        let h = self.intrinsic_hessian(p, &e1, &e2);
        let hs = SymmetricEigen::new(h);
        let index = hs.eigenvalues.iter().filter(|&&x| x < 0.0).count();
        let to3 = |c: Vector2<f64>| e1 * c[0] + e2 * c[1];
        let (orientation, ascending) = match index {
            0 => (Vec::new(), None),
            2 => (vec![e1, e2], None),
            _ => {
                let (mut ev, mut av) = saddle_directions(&j);
                if ev[0] < -1e-12 || (ev[0].abs() <= 1e-12 && ev[1] < 0.0) {
                    ev = -ev;
                }
                if ev[0] * av[1] - ev[1] * av[0] < 0.0 {
                    av = -av;
                }
                (vec![to3(ev)], Some(to3(av)))
            }
        };
        CriticalPoint {
            id: String::new(),
            index,
            position: *p,
            value: self.f(p),
            normal: n,
            frame: [e1, e2],
            jacobian: [[j[(0, 0)], j[(0, 1)]], [j[(1, 0)], j[(1, 1)]]],
            hessian: [[h[(0, 0)], h[(0, 1)]], [h[(1, 0)], h[(1, 1)]]],
            orientation,
            ascending,
        }
    }
}

/// Unit eigenvectors of `J` for its negative and positive eigenvalue; the
/// symmetric part is used when `J` has no real eigenvalue pair of
/// opposite signs.
fn saddle_directions(j: &Matrix2<f64>) -> (Vector2<f64>, Vector2<f64>) {
    let tr = j.trace();
    let det = j.determinant();
    let disc = tr * tr / 4.0 - det;
    if det < 0.0 && disc > 0.0 {
        let s = disc.sqrt();
        let eig = |l: f64| {
            // (J - l) x = 0: use the row of larger norm
            let r0 = Vector2::new(j[(0, 0)] - l, j[(0, 1)]);
            let r1 = Vector2::new(j[(1, 0)], j[(1, 1)] - l);
            let r = if r0.norm() >= r1.norm() { r0 } else { r1 };
            Vector2::new(-r[1], r[0]).normalize()
        };
        (eig(tr / 2.0 - s), eig(tr / 2.0 + s))
    } else {
        let sym = (j + j.transpose()) * 0.5;
        let se = SymmetricEigen::new(sym);
        let (lo, hi) = if se.eigenvalues[0] <= se.eigenvalues[1] { (0, 1) } else { (1, 0) };
        (se.eigenvectors.column(lo).into_owned(), se.eigenvectors.column(hi).into_owned())
    }
}
