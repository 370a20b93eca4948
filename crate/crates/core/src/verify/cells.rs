use std::collections::BTreeMap;

use serde::Serialize;

use super::VerifyError;
use crate::flow::{FiberMap, FlowScene, SceneKind};
use crate::homalg::{BasedComplex, ChainMap, Matrix};
use crate::rings::NovikovSeries;

/// Corner of the shipped grids; grid lines stay at distance at least
/// `0.05` from the critical points of the shipped circle-valued scenes.
pub const CELL_OFFSET: [f64; 2] = [0.1193, 0.0613];

type Terms = BTreeMap<(usize, usize), Vec<(i64, i64)>>;

/// Geometric cells of a flat torus chart: a `k x k` grid of squares of side
/// `1 / k` with lower-left corner at `offset`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub k: usize,
    pub offset: [f64; 2],
}

impl Grid {
    pub fn side(&self) -> f64 {
        1.0 / self.k as f64
    }

    pub fn corner(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.side();
        [self.offset[0] + i as f64 * h, self.offset[1] + j as f64 * h]
    }

    pub(crate) fn vertex(&self, i: usize, j: usize) -> usize {
        i * self.k + j
    }

    /// Edges are numbered `x` edges first, then `y` edges.
    pub(crate) fn x_edge(&self, i: usize, j: usize) -> usize {
        i * self.k + j
    }

    pub(crate) fn y_edge(&self, i: usize, j: usize) -> usize {
        self.k * self.k + i * self.k + j
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellKind {
    /// Grid on the torus chart; the first coordinate winds once around the
    /// cyclic cover when `twisted`.
    TorusGrid { grid: Grid, twisted: bool },
    /// Product cells `sigma` and `sigma x I` of a mapping torus over a
    /// cellular model of the fiber map.
    MappingTorus { fiber: String, fiber_cells: Vec<usize> },
}

/// Cellular chain complex of a shipped scene, lifted to the cyclic cover and
/// written over `Z((t))` via deck equivariance.
#[derive(Clone, Debug, Serialize)]
pub struct CellStructure {
    pub family: String,
    pub order: usize,
    pub kind: CellKind,
    pub complex: BasedComplex<NovikovSeries>,
}

fn to_matrix(t: &Terms, rows: usize, cols: usize, order: usize) -> Matrix<NovikovSeries> {
    let mut m = Matrix::zeros(rows, cols);
    for (&(i, j), v) in t {
        m.set(i, j, NovikovSeries::from_i64_terms(v, order as i64));
    }
    m
}

fn push(t: &mut Terms, row: usize, col: usize, power: i64, c: i64) {
    t.entry((row, col)).or_default().push((power, c));
}

impl CellStructure {
    /// The hand-specified structure of a shipped scene at refinement level
    /// `level`; each level halves the cells.
    pub fn shipped(scene: &FlowScene, order: usize, level: u32) -> Result<Self, VerifyError> {
        let scale = 1usize << level;
        match scene.kind() {
            SceneKind::CircleValued if scene.lattice().is_periodic() => {
                let grid = Grid { k: 2 * scale, offset: CELL_OFFSET };
                Self::torus_grid(scene.family(), grid, true, order)
            }
            SceneKind::MappingTorus => {
                let fiber = scene.fiber_map().expect("mapping torus has a fiber map");
                let (complex, map) = match fiber {
                    FiberMap::Circle { degree, .. } => circle_model(*degree, 2 * scale),
                    FiberMap::Torus { matrix } => torus_model(*matrix, scale),
                };
                let map = map?;
                Self::mapping_torus(scene.family(), &complex, &map, order)
            }
            _ => Err(VerifyError::NoCellStructure(scene.family().to_string())),
        }
    }

    pub fn torus_grid(family: &str, grid: Grid, twisted: bool, order: usize) -> Result<Self, VerifyError> {
        let k = grid.k;
        // crossing the seam x = offset + 1 moves to the lift t^-1
        let wrap = |i: usize| -> (usize, i64) {
            if i + 1 == k {
                (0, if twisted { -1 } else { 0 })
            } else {
                (i + 1, 0)
            }
        };
        let next = |j: usize| (j + 1) % k;
        let mut d1 = Terms::new();
        let mut d2 = Terms::new();
        for i in 0..k {
            for j in 0..k {
                let (i1, p) = wrap(i);
                let ex = grid.x_edge(i, j);
                push(&mut d1, grid.vertex(i1, j), ex, p, 1);
                push(&mut d1, grid.vertex(i, j), ex, 0, -1);
                let ey = grid.y_edge(i, j);
                push(&mut d1, grid.vertex(i, next(j)), ey, 0, 1);
                push(&mut d1, grid.vertex(i, j), ey, 0, -1);
                let f = grid.vertex(i, j);
                push(&mut d2, grid.x_edge(i, j), f, 0, 1);
                push(&mut d2, grid.y_edge(i1, j), f, p, 1);
                push(&mut d2, grid.x_edge(i, next(j)), f, 0, -1);
                push(&mut d2, grid.y_edge(i, j), f, 0, -1);
            }
        }
        let n = k * k;
        let mut bases = vec![Vec::new(), Vec::new(), Vec::new()];
        for i in 0..k {
            for j in 0..k {
                bases[0].push(format!("v{i}_{j}"));
                bases[2].push(format!("f{i}_{j}"));
            }
        }
        for dir in ["x", "y"] {
            for i in 0..k {
                for j in 0..k {
                    bases[1].push(format!("e{dir}{i}_{j}"));
                }
            }
        }
        let mats = vec![to_matrix(&d1, n, 2 * n, order), to_matrix(&d2, 2 * n, n, order)];
        let complex = BasedComplex::from_boundaries(order, bases, mats)?;
        Ok(Self { family: family.to_string(), order, kind: CellKind::TorusGrid { grid, twisted }, complex })
    }

    /// `C_k = C_k(X) + C_(k-1)(X) x I` with
    /// `d(sigma x I) = t g(sigma) - sigma - (d sigma) x I`.
    pub fn mapping_torus(
        family: &str,
        fiber: &BasedComplex<i64>,
        g: &ChainMap<i64>,
        order: usize,
    ) -> Result<Self, VerifyError> {
        let top = fiber.top_degree() + 1;
        let dim = |k: usize| if k <= fiber.top_degree() { fiber.dim(k) } else { 0 };
        let mut bases = Vec::with_capacity(top + 1);
        for k in 0..=top {
            let mut b: Vec<String> = if k <= fiber.top_degree() { fiber.basis(k).to_vec() } else { Vec::new() };
            if k > 0 {
                b.extend(fiber.basis(k - 1).iter().map(|s| format!("{s}xI")));
            }
            bases.push(b);
        }
        let mut upper = Vec::with_capacity(top);
        for k in 1..=top {
            let mut t = Terms::new();
            // rows: C_(k-1)(X) then C_(k-2)(X) x I; columns: C_k(X) then C_(k-1)(X) x I
            let (rows_x, cols_x) = (dim(k - 1), dim(k));
            if k <= fiber.top_degree() {
                for (i, j, v) in fiber.boundary(k).triplets() {
                    push(&mut t, i, j, 0, *v);
                }
            }
            let sigma = k - 1;
            for (i, j, v) in g.component(sigma).triplets() {
                push(&mut t, i, cols_x + j, 1, *v);
            }
            for j in 0..dim(sigma) {
                push(&mut t, j, cols_x + j, 0, -1);
            }
            if sigma >= 1 {
                for (i, j, v) in fiber.boundary(sigma).triplets() {
                    push(&mut t, rows_x + i, cols_x + j, 0, -v);
                }
            }
            let rows = rows_x + if k >= 2 { dim(k - 2) } else { 0 };
            upper.push(to_matrix(&t, rows, cols_x + dim(sigma), order));
        }
        let complex = BasedComplex::from_boundaries(order, bases, upper)?;
        let fiber_cells = (0..=fiber.top_degree()).map(|k| fiber.dim(k)).collect();
        Ok(Self {
            family: family.to_string(),
            order,
            kind: CellKind::MappingTorus { fiber: family.to_string(), fiber_cells },
            complex,
        })
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.complex.euler_characteristic()
    }

    pub fn grid(&self) -> Option<&Grid> {
        match &self.kind {
            CellKind::TorusGrid { grid, .. } => Some(grid),
            CellKind::MappingTorus { .. } => None,
        }
    }
}

/// Lattice path from `a` to `b` in a one-dimensional cell structure with
/// `m` vertices: signed edge indices.
fn circle_path(a: i64, b: i64, m: i64) -> Vec<(usize, i64)> {
    if b >= a {
        (a..b).map(|r| (r.rem_euclid(m) as usize, 1)).collect()
    } else {
        (b..a).map(|r| (r.rem_euclid(m) as usize, -1)).collect()
    }
}

/// Circle with `m` vertices and the cellular map of `x -> d x`, which is
/// homotopic to the fiber map through `d x + s (a / 2 pi) sin 2 pi x`.
pub fn circle_model(d: i64, m: usize) -> (BasedComplex<i64>, Result<ChainMap<i64>, VerifyError>) {
    let mi = m as i64;
    let mut d1 = Matrix::zeros(m, m);
    let mut g0 = Matrix::zeros(m, m);
    let mut g1 = Matrix::zeros(m, m);
    for j in 0..m {
        d1.add_to((j + 1) % m, j, &1);
        d1.add_to(j, j, &-1);
        g0.add_to((d * j as i64).rem_euclid(mi) as usize, j, &1);
        for (e, s) in circle_path(d * j as i64, d * (j as i64 + 1), mi) {
            g1.add_to(e, j, &s);
        }
    }
    let bases = vec![(0..m).map(|j| format!("v{j}")).collect(), (0..m).map(|j| format!("e{j}")).collect()];
    let c = BasedComplex::from_boundaries((), bases, vec![d1]).expect("circle complex");
    let g = ChainMap::new(c.clone(), c.clone(), vec![g0, g1]).map_err(VerifyError::from);
    (c, g)
}

/// Staircase path in the `k x k` grid: `step[0]` horizontal edges, then
/// `step[1]` vertical edges, starting at the lattice point `from`.
fn stair(grid: &Grid, from: [i64; 2], step: [i64; 2]) -> Vec<(usize, i64)> {
    let k = grid.k as i64;
    let m = |v: i64| v.rem_euclid(k) as usize;
    let mut out: Vec<(usize, i64)> = circle_path(from[0], from[0] + step[0], k)
        .into_iter()
        .map(|(i, s)| (grid.x_edge(i, m(from[1])), s))
        .collect();
    let x = from[0] + step[0];
    out.extend(circle_path(from[1], from[1] + step[1], k).into_iter().map(|(j, s)| (grid.y_edge(m(x), j), s)));
    out
}

/// Closed lattice polygon through the corners of a staircase loop.
fn stair_corners(from: [i64; 2], step: [i64; 2]) -> [[i64; 2]; 2] {
    [[from[0] + step[0], from[1]], [from[0] + step[0], from[1] + step[1]]]
}

/// Winding number of a closed axis-parallel lattice polygon about the
/// centre of the unit square with lower-left corner `c`.
fn winding(poly: &[[i64; 2]], c: [i64; 2]) -> i64 {
    // count signed crossings of vertical edges with the ray to the right of the centre
    let (px, py) = (2 * c[0] + 1, 2 * c[1] + 1);
    let mut w = 0;
    for s in 0..poly.len() {
        let (a, b) = (poly[s], poly[(s + 1) % poly.len()]);
        if a[0] != b[0] || 2 * a[0] <= px {
            continue;
        }
        let (ya, yb) = (2 * a[1], 2 * b[1]);
        if ya < py && yb > py {
            w += 1;
        } else if ya > py && yb < py {
            w -= 1;
        }
    }
    w
}

/// Square torus grid with `k x k` cells and the cellular approximation of
/// the linear map `A` by staircase paths; faces map to the cells enclosed
/// by the image of their boundary, counted with winding number.
pub fn torus_model(a: [[i64; 2]; 2], k: usize) -> (BasedComplex<i64>, Result<ChainMap<i64>, VerifyError>) {
    let grid = Grid { k, offset: [0.0, 0.0] };
    let flat = CellStructure::torus_grid("fiber", grid.clone(), false, 1).expect("grid complex");
    let to_int = |m: Matrix<NovikovSeries>| {
        m.map(|v| {
            use num_traits::ToPrimitive;
            v.coeff(0).map_or(0, |c| c.to_i64().expect("small entry"))
        })
    };
    let c = BasedComplex::from_boundaries(
        (),
        flat.complex.bases().to_vec(),
        vec![to_int(flat.complex.boundary(1)), to_int(flat.complex.boundary(2))],
    )
    .expect("grid complex");
    let n = k * k;
    let ki = k as i64;
    let c1 = [a[0][0], a[1][0]];
    let c2 = [a[0][1], a[1][1]];
    let img = |i: usize, j: usize| [a[0][0] * i as i64 + a[0][1] * j as i64, a[1][0] * i as i64 + a[1][1] * j as i64];
    let add = |p: [i64; 2], q: [i64; 2]| [p[0] + q[0], p[1] + q[1]];
    let mut g0 = Matrix::zeros(n, n);
    let mut g1 = Matrix::zeros(2 * n, 2 * n);
    let mut g2 = Matrix::zeros(n, n);
    let m = |v: i64| v.rem_euclid(ki) as usize;
    for i in 0..k {
        for j in 0..k {
            let p = img(i, j);
            g0.add_to(grid.vertex(m(p[0]), m(p[1])), grid.vertex(i, j), &1);
            for (e, s) in stair(&grid, p, c1) {
                g1.add_to(e, grid.x_edge(i, j), &s);
            }
            for (e, s) in stair(&grid, p, c2) {
                g1.add_to(e, grid.y_edge(i, j), &s);
            }
            // boundary loop: stair(p, c1), stair(p + c1, c2), back along stair(p + c2, c1), stair(p, c2)
            let q1 = add(p, c1);
            let q2 = add(p, c2);
            let mut poly = vec![p];
            poly.extend(stair_corners(p, c1));
            poly.extend(stair_corners(q1, c2));
            let back = stair_corners(q2, c1);
            poly.push(back[0]);
            poly.push(q2);
            let up = stair_corners(p, c2);
            poly.push(up[0]);
            let (lo, hi) = poly.iter().fold(([i64::MAX; 2], [i64::MIN; 2]), |(lo, hi), v| {
                ([lo[0].min(v[0]), lo[1].min(v[1])], [hi[0].max(v[0]), hi[1].max(v[1])])
            });
            for x in lo[0]..hi[0] {
                for y in lo[1]..hi[1] {
                    let w = winding(&poly, [x, y]);
                    if w != 0 {
                        g2.add_to(grid.vertex(m(x), m(y)), grid.vertex(i, j), &w);
                    }
                }
            }
        }
    }
    let g = ChainMap::new(c.clone(), c.clone(), vec![g0, g1, g2]).map_err(VerifyError::from);
    (c, g)
}
