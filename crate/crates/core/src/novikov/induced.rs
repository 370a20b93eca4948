use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{bases, build_novikov_complex, deck_power, depth_error, lift_shift, NovikovComplex, NovikovError};
use crate::flow::{trace, trace_branch, Direction, FlowScene, Separatrix, StopRule, Terminus, P3};
use crate::homalg::{ChainMap, Matrix};
use crate::morse::intersect::{crossings, Pt, MIN_SINE};
use crate::morse::{saddle_curve, SurfaceMap};
use crate::rings::NovikovSeries;

/// A map of the quotient together with the deck power of its lift:
/// the lifted map is `t^deck` composed with `map` on the unrolled chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedMap {
    pub map: SurfaceMap,
    pub deck: Option<i64>,
}

impl LiftedMap {
    pub fn new(map: SurfaceMap, deck: i64) -> Self {
        Self { map, deck: Some(deck) }
    }

    fn lifted(&self) -> Result<SurfaceMap, NovikovError> {
        let deck = self.deck.ok_or(NovikovError::LiftAmbiguity)?;
        let o = self.map.offset();
        Ok(SurfaceMap::Affine { matrix: self.map.matrix(), offset: [o[0] - deck as f64, o[1]] })
    }
}

#[derive(Clone, Debug)]
pub struct NovikovInducedMap {
    pub map: LiftedMap,
    pub order: usize,
    /// Bound used for `|F(A x) - F(x)|` when choosing trace depths.
    pub margin: usize,
    pub chain_map: ChainMap<NovikovSeries>,
}

impl NovikovInducedMap {
    pub fn to_json(&self) -> Value {
        json!({ "map": self.map, "order": self.order, "margin": self.margin, "chain_map": self.chain_map.to_json() })
    }
}

fn chart(p: &P3) -> Pt {
    [p.x, p.y]
}

fn p3(x: Pt) -> P3 {
    P3::new(x[0], x[1], 0.0)
}

fn grazing(what: &str, at: Pt) -> NovikovError {
    NovikovError::TransversalityFailure(format!("{what} near ({:.6}, {:.6})", at[0], at[1]))
}

/// Ceiling of `sup |F_target(A x) - F_source(x)|` over a grid, plus one.
fn value_margin(map: &SurfaceMap, source: &FlowScene, target: &FlowScene) -> usize {
    let n = 64;
    let mut sup: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = [i as f64 / n as f64, j as f64 / n as f64];
            sup = sup.max((target.f(&p3(map.apply(x))) - source.f(&p3(x))).abs());
        }
    }
    sup.ceil() as usize + 1
}

pub(crate) fn trace_lift(
    scene: &FlowScene,
    id: &str,
    shift: [i64; 2],
    dir: Direction,
    level: f64,
    order: usize,
) -> Result<Vec<Separatrix>, NovikovError> {
    let c = scene.critical(id).unwrap();
    [1i8, -1]
        .iter()
        .map(|&b| trace_branch(scene, c, shift, dir, b, Some(level)).map_err(|e| depth_error(e, order)))
        .collect()
}

type Terms = BTreeMap<(usize, usize), Vec<(i64, i64)>>;

/// Degree-one intersection numbers of the image of the descending curve of
/// the lift `t^k p`, as powers relative to that lift.
#[allow(clippy::too_many_arguments)]
fn degree_one_row(
    map: &SurfaceMap,
    source: &FlowScene,
    src: &NovikovComplex,
    p: &str,
    k: i64,
    asc: &[Vec<Pt>],
    tgt: &NovikovComplex,
    target_ids: &[String],
    depth: f64,
) -> Result<Vec<(usize, i64, i64)>, NovikovError> {
    let seps = trace_lift(source, p, lift_shift(src.lifts[p], k), Direction::Descending, src.lambda - depth, src.order)?;
    let img: Vec<Pt> = saddle_curve(source, &seps, p, Direction::Descending).iter().map(|x| map.apply(chart(x))).collect();
    let mut out = Vec::new();
    for (qi, a) in asc.iter().enumerate() {
        let c = crossings(&img, a, true, MIN_SINE)
            .map_err(|g| grazing("image of a descending curve grazes an ascending curve", g.at))?;
        for x in c {
            // lift of q crossed: basis lift translated by x.shift
            let q = &target_ids[qi];
            let power = deck_power(tgt.lifts[q], [tgt.lifts[q] + x.shift[0], x.shift[1]]) - k;
            out.push((qi, power, x.sign));
        }
    }
    out.sort();
    Ok(out)
}

/// Induced chain map of a lifted self-map between Novikov complexes,
/// computed from intersection numbers in the unrolled chart and checked to
/// be t-equivariant and a chain map to order `order`.
pub fn novikov_induced_map(
    map: &LiftedMap,
    source: &FlowScene,
    target: &FlowScene,
    lambda: f64,
    order: usize,
) -> Result<NovikovInducedMap, NovikovError> {
    let lifted = map.lifted()?;
    for s in [source, target] {
        if !lifted.supported_on(s) {
            return Err(NovikovError::UnsupportedMap { map: lifted.label(), scene: s.family().to_string() });
        }
    }
    let src = build_novikov_complex(source, lambda, order)?;
    let tgt = build_novikov_complex(target, lambda, order)?;
    let margin = value_margin(&lifted, source, target);
    let n = order as i64;
    let sb = bases(source);
    let tb = bases(target);
    let mut terms: Vec<Terms> = vec![Terms::new(), Terms::new(), Terms::new()];

    // degree 0: image of each minimum flows down to a minimum lift, or below the window
    let low = lambda - (order + margin + 1) as f64;
    for (j, p) in sb[0].iter().enumerate() {
        let c = source.critical(p).unwrap();
        let y = lifted.apply3(&source.lattice().shift(&c.position, lift_shift(src.lifts[p], 0)));
        let lift = match target.nearest_critical(&y) {
            Some((i, s, d)) if d < target.numerics().rho => {
                let t = &target.critical_points()[i];
                if t.index != 0 {
                    return Err(grazing(&format!("image of {p} lies at {}", t.id), chart(&y)));
                }
                Some(crate::flow::Lift { id: t.id.clone(), shift: s })
            }
            _ => {
                let t = trace(target, &y, Direction::Descending, &StopRule { level: Some(low), origin: None })
                    .map_err(|e| depth_error(crate::flow::FlowError::Branch { branch: p.clone(), source: Box::new(e) }, order))?;
                match t.terminus {
                    Terminus::Critical { lift } if target.critical(&lift.id).unwrap().index == 0 => Some(lift),
                    Terminus::Critical { lift } => return Err(grazing(&format!("image of {p} flows to {}", lift.id), chart(&y))),
                    Terminus::Level { .. } => None,
                }
            }
        };
        if let Some(l) = lift {
            let qi = tb[0].iter().position(|q| q == &l.id).unwrap();
            terms[0].entry((qi, j)).or_default().push((deck_power(tgt.lifts[&l.id], l.shift), 1));
        }
    }

    // degree 1: images of descending curves against ascending curves of the target
    let high = lambda + (margin + 1) as f64;
    let asc: Vec<Vec<Pt>> = tb[1]
        .iter()
        .map(|q| {
            let seps = trace_lift(target, q, lift_shift(tgt.lifts[q], 0), Direction::Ascending, high, order)?;
            Ok(saddle_curve(target, &seps, q, Direction::Ascending).iter().map(chart).collect())
        })
        .collect::<Result<_, NovikovError>>()?;
    let depth = (order + margin) as f64;
    let rows: Vec<(Vec<(usize, i64, i64)>, Vec<(usize, i64, i64)>)> = sb[1]
        .par_iter()
        .map(|p| {
            let r0 = degree_one_row(&lifted, source, &src, p, 0, &asc, &tgt, &tb[1], depth)?;
            let r1 = degree_one_row(&lifted, source, &src, p, 1, &asc, &tgt, &tb[1], depth + 1.0)?;
            Ok((r0, r1))
        })
        .collect::<Result<_, NovikovError>>()?;
    for (j, (r0, r1)) in rows.iter().enumerate() {
        let keep = |r: &Vec<(usize, i64, i64)>| r.iter().filter(|x| x.1 < n).copied().collect::<Vec<_>>();
        if keep(r0) != keep(r1) {
            return Err(NovikovError::MismatchError {
                degree: 1,
                row: sb[1][j].clone(),
                col: "t-translate".into(),
                detail: "intersection numbers of t p and p differ".into(),
            });
        }
        for &(qi, power, sign) in r0 {
            terms[1].entry((qi, j)).or_default().push((power, sign));
        }
    }

    // degree 2: preimages of the target maxima ascend to source maxima
    let sign = lifted.det().signum();
    let top = lambda + (order + margin + 1) as f64;
    let m = lifted.matrix();
    let r = m.iter().flatten().map(|v| v.abs()).sum::<i64>() + 2;
    for (i, q) in tb[2].iter().enumerate() {
        let y0 = tgt_position(target, q, tgt.lifts[q]);
        for b in -r..=r {
            let x = lifted.inverse_image([y0[0], y0[1] + b as f64]);
            if !(0.0..1.0).contains(&x[1]) {
                continue;
            }
            let xp = p3(x);
            let lift = match source.nearest_critical(&xp) {
                Some((ci, s, d)) if d < source.numerics().rho => {
                    let c = &source.critical_points()[ci];
                    if c.index != 2 {
                        return Err(grazing(&format!("preimage of {q} lies at {}", c.id), x));
                    }
                    Some(crate::flow::Lift { id: c.id.clone(), shift: s })
                }
                _ => {
                    let t = trace(source, &xp, Direction::Ascending, &StopRule { level: Some(top), origin: None })
                        .map_err(|e| depth_error(crate::flow::FlowError::Branch { branch: q.clone(), source: Box::new(e) }, order))?;
                    match t.terminus {
                        Terminus::Critical { lift } if source.critical(&lift.id).unwrap().index == 2 => Some(lift),
                        Terminus::Critical { lift } => return Err(grazing(&format!("preimage of {q} flows to {}", lift.id), x)),
                        Terminus::Level { .. } => None,
                    }
                }
            };
            if let Some(l) = lift {
                let j = sb[2].iter().position(|p| p == &l.id).unwrap();
                terms[2].entry((i, j)).or_default().push((-deck_power(src.lifts[&l.id], l.shift), sign));
            }
        }
    }

    let comps: Vec<Matrix<NovikovSeries>> = terms
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let mut mat = Matrix::zeros(tb[k].len(), sb[k].len());
            for (&(i, j), v) in t {
                mat.set(i, j, NovikovSeries::from_i64_terms(v, n));
            }
            mat
        })
        .collect();
    let chain_map = ChainMap::new(src.complex.clone(), tgt.complex.clone(), comps)?;
    Ok(NovikovInducedMap { map: map.clone(), order, margin, chain_map })
}

fn tgt_position(scene: &FlowScene, id: &str, a: i64) -> Pt {
    let c = scene.critical(id).unwrap();
    chart(&scene.lattice().shift(&c.position, lift_shift(a, 0)))
}
