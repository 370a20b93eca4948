use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::intersect::{crossings, Pt, MIN_SINE};
use super::maps::SurfaceMap;
use super::{build_morse_complex, MorseComplex, MorseError};
use crate::flow::{trace, Direction, FlowScene, Lift, Separatrix, StopRule, Terminus, P3};
use crate::homalg::{homology_map, ChainMap, Matrix};

/// Chain map `A_flat` between two Morse complexes.
#[derive(Clone, Debug)]
pub struct InducedMap {
    pub map: SurfaceMap,
    pub chain_map: ChainMap<i64>,
}

impl InducedMap {
    /// Induced map on rational homology in each degree.
    pub fn on_homology(&self) -> Vec<Vec<Vec<BigRational>>> {
        (0..self.chain_map.components().len()).map(|k| homology_map(&self.chain_map, k)).collect()
    }

    pub fn to_json(&self) -> Value {
        let h: Vec<Vec<Vec<String>>> = self
            .on_homology()
            .into_iter()
            .map(|m| m.into_iter().map(|r| r.into_iter().map(|x| x.to_string()).collect()).collect())
            .collect();
        json!({ "map": self.map, "chain_map": self.chain_map.to_json(), "homology": h })
    }
}

pub(crate) fn chart(p: &P3) -> Pt {
    [p.x, p.y]
}

/// Whole descending (or ascending) curve of a saddle as one polyline
/// through the saddle, oriented along the `+1` branch and closed off at the
/// critical points it ends in.
pub(crate) fn saddle_curve(scene: &FlowScene, seps: &[Separatrix], id: &str, dir: Direction) -> Vec<P3> {
    let branch = |b: i8| seps.iter().find(|s| s.origin.id == id && s.direction == dir && s.branch == b).expect("branch traced");
    let end = |s: &Separatrix| match &s.terminus {
        Terminus::Critical { lift } => Some(scene.lattice().shift(&scene.critical(&lift.id).unwrap().position, lift.shift)),
        Terminus::Level { .. } => None,
    };
    let (m, p) = (branch(-1), branch(1));
    let mut out: Vec<P3> = end(m).into_iter().collect();
    out.extend(m.samples.iter().rev());
    out.extend(p.samples.iter().skip(1));
    out.extend(end(p));
    out
}

fn grazing(what: &str, at: Pt) -> MorseError {
    MorseError::TransversalityFailure(format!("{what} near ({:.6}, {:.6})", at[0], at[1]))
}

/// Where a descending trajectory from `y` ends, in the given scene;
/// `y` inside a trap ball of a minimum counts as that minimum.
pub(crate) fn basin(scene: &FlowScene, y: &P3, dir: Direction, want_index: usize) -> Result<Lift, MorseError> {
    let rho = scene.numerics().rho;
    let cps = scene.critical_points();
    let what = if want_index == 0 { "image of a minimum" } else { "preimage of a maximum" };
    if let Some((i, s, d)) = scene.nearest_critical(y) {
        if d < rho {
            if cps[i].index == want_index {
                return Ok(Lift { id: cps[i].id.clone(), shift: s });
            }
            return Err(grazing(&format!("{what} lies at {}", cps[i].id), chart(y)));
        }
    }
    let t = trace(scene, y, dir, &StopRule::default())?;
    match t.terminus {
        Terminus::Critical { lift } if scene.critical(&lift.id).map(|c| c.index) == Some(want_index) => Ok(lift),
        other => Err(grazing(&format!("{what} flows to {other:?}"), chart(y))),
    }
}

fn pos_of(basis: &[String], id: &str) -> usize {
    basis.iter().position(|b| b == id).expect("critical point in basis")
}

/// Computes `A_flat` from intersection numbers of `A`-images of descending
/// cells of the source with ascending cells of the target and checks the
/// chain-map identity.
pub fn induced_map(map: &SurfaceMap, source: &FlowScene, target: &FlowScene) -> Result<InducedMap, MorseError> {
    let sm = build_morse_complex(source)?;
    let tm = build_morse_complex(target)?;
    induced_map_between(map, source, &sm, target, &tm)
}

pub fn induced_map_between(
    map: &SurfaceMap,
    source: &FlowScene,
    sm: &MorseComplex,
    target: &FlowScene,
    tm: &MorseComplex,
) -> Result<InducedMap, MorseError> {
    for s in [source, target] {
        if !map.supported_on(s) {
            return Err(MorseError::UnsupportedMap { map: map.label(), scene: s.family().to_string() });
        }
    }
    if !source.lattice().is_periodic() {
        // the identity on an embedded surface: D(p) meets the ascending
        // cell of q of the same index only when p = q, transversally at p
        if source.spec() != target.spec() || sm.complex.bases() != tm.complex.bases() {
            return Err(MorseError::UnsupportedMap { map: map.label(), scene: target.family().to_string() });
        }
        return Ok(InducedMap { map: map.clone(), chain_map: ChainMap::identity(&sm.complex) });
    }
    let sb = sm.complex.bases();
    let tb = tm.complex.bases();
    let mut comps: Vec<Matrix<i64>> = (0..3).map(|k| Matrix::zeros(tb[k].len(), sb[k].len())).collect();

    let d0: Vec<Lift> = sb[0]
        .par_iter()
        .map(|id| basin(target, &map.apply3(&source.critical(id).unwrap().position), Direction::Descending, 0))
        .collect::<Result<_, _>>()?;
    for (j, l) in d0.iter().enumerate() {
        comps[0].add_to(pos_of(&tb[0], &l.id), j, &1);
    }

    let asc: Vec<Vec<Pt>> = tb[1]
        .iter()
        .map(|q| saddle_curve(target, &tm.separatrices, q, Direction::Ascending).iter().map(chart).collect())
        .collect();
    let maxima: Vec<P3> = tb[2].iter().map(|q| target.critical(q).unwrap().position).collect();
    let eps = target.numerics().eps;
    let d1: Vec<Vec<(usize, i64)>> = sb[1]
        .par_iter()
        .map(|p| {
            let img: Vec<Pt> = saddle_curve(source, &sm.separatrices, p, Direction::Descending)
                .iter()
                .map(|x| map.apply(chart(x)))
                .collect();
            for seg in img.windows(2) {
                for m in &maxima {
                    if segment_torus_distance(seg[0], seg[1], chart(m)) < eps {
                        return Err(grazing("image of a descending curve meets a maximum", seg[0]));
                    }
                }
            }
            let mut out = Vec::new();
            for (qi, a) in asc.iter().enumerate() {
                let c = crossings(&img, a, true, MIN_SINE).map_err(|g| grazing("image of a descending curve grazes an ascending curve", g.at))?;
                out.extend(c.iter().map(|c| (qi, c.sign)));
            }
            Ok(out)
        })
        .collect::<Result<_, MorseError>>()?;
    for (j, row) in d1.iter().enumerate() {
        for &(qi, s) in row {
            comps[1].add_to(qi, j, &s);
        }
    }

    let sign = map.det().signum();
    let d2: Vec<Vec<Lift>> = tb[2]
        .par_iter()
        .map(|q| {
            preimages(map, chart(&target.critical(q).unwrap().position))
                .iter()
                .map(|x| basin(source, &P3::new(x[0], x[1], 0.0), Direction::Ascending, 2))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    for (i, ls) in d2.iter().enumerate() {
        for l in ls {
            comps[2].add_to(i, pos_of(&sb[2], &l.id), &sign);
        }
    }

    let chain_map = ChainMap::new(sm.complex.clone(), tm.complex.clone(), comps)?;
    Ok(InducedMap { map: map.clone(), chain_map })
}

/// Distance in the torus from the segment `[a, b]` to the lattice orbit of `m`.
fn segment_torus_distance(a: Pt, b: Pt, m: Pt) -> f64 {
    let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let m = [m[0] + (mid[0] - m[0]).round(), m[1] + (mid[1] - m[1]).round()];
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let s = if len2 == 0.0 { 0.0 } else { (((m[0] - a[0]) * d[0] + (m[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0) };
    (a[0] + s * d[0] - m[0]).hypot(a[1] + s * d[1] - m[1])
}

/// Preimages of the lattice orbit of `y` lying in the unit square.
pub(crate) fn preimages(map: &SurfaceMap, y: Pt) -> Vec<Pt> {
    let m = map.matrix();
    let r = m.iter().flatten().map(|v| v.abs()).sum::<i64>() + 2;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let x = map.inverse_image([y[0] + a as f64, y[1] + b as f64]);
            if (0.0..1.0).contains(&x[0]) && (0.0..1.0).contains(&x[1]) {
                out.push(x);
            }
        }
    }
    out.sort_by(|p, q| p.partial_cmp(q).unwrap());
    out
}
