use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::cells::{CellKind, CellStructure, Grid};
use super::VerifyError;
use crate::flow::{trace, Direction, FlowError, FlowScene, StopRule, Terminus, P3};
use crate::homalg::{BasedComplex, ChainMap, Matrix};
use crate::morse::intersect::{crossings, Pt, MIN_SINE};
use crate::morse::saddle_curve;
use crate::novikov::{build_novikov_complex, deck_power, lift_shift, trace_lift};
use crate::rings::NovikovSeries;

/// Intersections of one cell with the ascending discs of the critical
/// points of matching index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellRecord {
    pub cell: String,
    pub degree: usize,
    /// `(critical point, deck power, sign)`.
    pub hits: Vec<(String, i64, i64)>,
}

#[derive(Clone, Debug)]
pub struct SchutzMap {
    pub lambda: Option<f64>,
    pub cells: Vec<CellRecord>,
    pub chain_map: ChainMap<NovikovSeries>,
}

fn p3(x: Pt) -> P3 {
    P3::new(x[0], x[1], 0.0)
}

fn failure(what: String) -> VerifyError {
    VerifyError::TransversalityFailure(what)
}

/// `xi(sigma) = sum_q (sigma . D(q, -v)) q` with intersection numbers
/// gathered by deck power, checked to be a chain map to the cell
/// structure's order.
pub fn schutz_map(scene: &FlowScene, cells: &CellStructure, lambda: f64) -> Result<SchutzMap, VerifyError> {
    let order = cells.order;
    let grid = match &cells.kind {
        CellKind::MappingTorus { .. } => {
            // no critical points: the Novikov complex is zero
            let target = BasedComplex::zero_complex(order);
            let chain_map = ChainMap::new(cells.complex.clone(), target, Vec::new())?;
            return Ok(SchutzMap { lambda: None, cells: Vec::new(), chain_map });
        }
        CellKind::TorusGrid { grid, .. } => grid,
    };
    let nov = build_novikov_complex(scene, lambda, order)?;
    let basis = nov.complex.bases().to_vec();
    let index_of = |k: usize, id: &str| basis[k].iter().position(|b| b == id).unwrap();
    let (fmin, fmax) = value_range(scene, grid);
    let n = order as i64;

    let vertex_jobs: Vec<(usize, usize)> = (0..grid.k).flat_map(|i| (0..grid.k).map(move |j| (i, j))).collect();
    let low = fmin - (order + 2) as f64;
    let vertex_hits: Vec<Vec<(String, i64, i64)>> = vertex_jobs
        .par_iter()
        .map(|&(i, j)| {
            let y = p3(grid.corner(i, j));
            let t = trace(scene, &y, Direction::Descending, &StopRule { level: Some(low), origin: None })
                .map_err(|e| flow_failure(e, &format!("v{i}_{j}")))?;
            Ok(match t.terminus {
                Terminus::Level { .. } => Vec::new(),
                Terminus::Critical { lift } => {
                    if scene.critical(&lift.id).unwrap().index != 0 {
                        return Err(failure(format!("vertex v{i}_{j} lies on the ascending disc of {}", lift.id)));
                    }
                    vec![(lift.id.clone(), deck_power(nov.lifts[&lift.id], lift.shift), 1)]
                }
            })
        })
        .collect::<Result<_, VerifyError>>()?;

    let high = fmax + (order + 2) as f64;
    let asc: Vec<(String, Vec<Pt>)> = basis[1]
        .iter()
        .map(|q| {
            let seps = trace_lift(scene, q, lift_shift(nov.lifts[q], 0), Direction::Ascending, high, order)?;
            Ok((q.clone(), saddle_curve(scene, &seps, q, Direction::Ascending).iter().map(|x| [x.x, x.y]).collect()))
        })
        .collect::<Result<_, VerifyError>>()?;
    let h = grid.side();
    let edge_jobs: Vec<(String, Pt, Pt)> = ["x", "y"]
        .iter()
        .flat_map(|d| vertex_jobs.iter().map(move |&(i, j)| (*d, i, j)))
        .map(|(d, i, j)| {
            let a = grid.corner(i, j);
            let b = if d == "x" { [a[0] + h, a[1]] } else { [a[0], a[1] + h] };
            (format!("e{d}{i}_{j}"), a, b)
        })
        .collect();
    let edge_hits: Vec<Vec<(String, i64, i64)>> = edge_jobs
        .par_iter()
        .map(|(label, a, b)| {
            let mut hits = Vec::new();
            for (q, curve) in &asc {
                let c = crossings(&[*a, *b], curve, true, MIN_SINE)
                    .map_err(|g| failure(format!("edge {label} grazes the ascending disc of {q} near ({:.6}, {:.6})", g.at[0], g.at[1])))?;
                hits.extend(c.into_iter().map(|x| (q.clone(), -x.shift[0], x.sign)));
            }
            Ok(hits)
        })
        .collect::<Result<_, VerifyError>>()?;

    let rho = scene.numerics().rho;
    let mut face_hits = Vec::with_capacity(vertex_jobs.len());
    for &(i, j) in &vertex_jobs {
        let lo = grid.corner(i, j);
        let mut hits = Vec::new();
        for q in &basis[2] {
            let c = scene.critical(q).unwrap();
            let base = scene.lattice().shift(&c.position, lift_shift(nov.lifts[q], 0));
            let s0 = ((lo[0] - base.x) / 1.0).floor() as i64;
            let s1 = ((lo[1] - base.y) / 1.0).floor() as i64;
            for a in s0..=s0 + 1 {
                for b in s1..=s1 + 1 {
                    let p = [base.x + a as f64, base.y + b as f64];
                    let dx = [p[0] - lo[0], p[1] - lo[1]];
                    let inside = (0.0..h).contains(&dx[0]) && (0.0..h).contains(&dx[1]);
                    let margin = dx.iter().map(|d| d.abs().min((d - h).abs())).fold(f64::INFINITY, f64::min);
                    if margin < rho {
                        return Err(failure(format!("face f{i}_{j} boundary passes within {margin:.2e} of {q}")));
                    }
                    if inside {
                        hits.push((q.clone(), -a, 1));
                    }
                }
            }
        }
        face_hits.push(hits);
    }

    let mut records = Vec::new();
    let mut comps = Vec::with_capacity(3);
    for (k, hits) in [vertex_hits, edge_hits, face_hits].into_iter().enumerate() {
        let mut terms: BTreeMap<(usize, usize), Vec<(i64, i64)>> = BTreeMap::new();
        for (j, h) in hits.iter().enumerate() {
            for (q, power, sign) in h {
                terms.entry((index_of(k, q), j)).or_default().push((*power, *sign));
            }
            records.push(CellRecord { cell: cells.complex.basis(k)[j].clone(), degree: k, hits: h.clone() });
        }
        let mut m = Matrix::zeros(basis[k].len(), cells.complex.dim(k));
        for (&(i, j), v) in &terms {
            m.set(i, j, NovikovSeries::from_i64_terms(v, n));
        }
        comps.push(m);
    }
    let chain_map = ChainMap::new(cells.complex.clone(), nov.complex.clone(), comps)?;
    Ok(SchutzMap { lambda: Some(lambda), cells: records, chain_map })
}

fn flow_failure(e: FlowError, cell: &str) -> VerifyError {
    match e {
        FlowError::StartInTrap { id, .. } => failure(format!("cell {cell} meets the trap ball of {id}")),
        e => VerifyError::Flow(e),
    }
}

/// Range of the lifted function over the grid's fundamental domain.
fn value_range(scene: &FlowScene, grid: &Grid) -> (f64, f64) {
    let n = 64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..=n {
        for j in 0..=n {
            let v = scene.f(&p3([grid.offset[0] + i as f64 / n as f64, grid.offset[1] + j as f64 / n as f64]));
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}
