use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    bases, build_novikov_complex, check_regular, choose_lifts, deck_power, depth_error, lift_shift, require_circle_valued,
    NovikovError,
};
use crate::flow::{trace_branch, Direction, FlowScene};
use crate::homalg::{BasedComplex, Matrix};

fn label(k: usize, id: &str) -> String {
    if k == 0 {
        id.to_string()
    } else {
        format!("t^{k}{id}")
    }
}

/// Morse complex of the cobordism `W_n = F^-1([lambda - n, lambda])`
/// relative to its lower boundary, with basis `t^k p` (`k < n`) ordered by
/// `k` first. Every lift is traced separately from its own position.
pub fn unrolled_complex(scene: &FlowScene, lambda: f64, n: usize) -> Result<BasedComplex<i64>, NovikovError> {
    require_circle_valued(scene)?;
    check_regular(scene, lambda)?;
    let lifts = choose_lifts(scene, lambda);
    let base = bases(scene);
    let basis: Vec<Vec<String>> =
        base.iter().map(|b| (0..n).flat_map(|k| b.iter().map(move |id| label(k, id))).collect()).collect();
    let index = |deg: usize, k: usize, id: &str| k * base[deg].len() + base[deg].iter().position(|b| b == id).unwrap();
    let jobs: Vec<_> = (0..n)
        .flat_map(|k| {
            scene.critical_of_index(1).into_iter().flat_map(move |c| {
                [Direction::Descending, Direction::Ascending]
                    .into_iter()
                    .flat_map(move |d| [1i8, -1].into_iter().map(move |b| (k, c, d, b)))
            })
        })
        .collect();
    let seps = jobs
        .par_iter()
        .map(|&(k, c, d, b)| {
            let level = match d {
                Direction::Descending => lambda - n as f64,
                Direction::Ascending => lambda,
            };
            let s = trace_branch(scene, c, lift_shift(lifts[&c.id], k as i64), d, b, Some(level)).map_err(|e| depth_error(e, n))?;
            Ok((k, s))
        })
        .collect::<Result<Vec<_>, NovikovError>>()?;
    let mut d1 = Matrix::zeros(basis[0].len(), basis[1].len());
    let mut d2 = Matrix::zeros(basis[1].len(), basis[2].len());
    for (k, s) in &seps {
        let Some(lift) = s.terminus.critical() else { continue };
        let target = scene.critical(&lift.id).unwrap();
        let j = deck_power(lifts[&lift.id], lift.shift);
        if target.index == 1 {
            return Err(NovikovError::TransversalityFailure(format!("{} reaches {} {:?}", s.origin.id, lift.id, lift.shift)));
        }
        if j < 0 || j >= n as i64 {
            return Err(NovikovError::MismatchError {
                degree: target.index.max(1),
                row: s.origin.id.clone(),
                col: lift.id.clone(),
                detail: format!("terminus t^{j} outside W_{n}"),
            });
        }
        let p = index(1, *k, &s.origin.id);
        match s.direction {
            Direction::Descending => d1.add_to(index(0, j as usize, &lift.id), p, &(s.sign as i64)),
            Direction::Ascending => d2.add_to(p, index(2, j as usize, &lift.id), &(s.sign as i64)),
        }
    }
    Ok(BasedComplex::from_boundaries((), basis, vec![d1, d2])?)
}

#[derive(Clone, Debug, Serialize)]
pub struct TowerReport {
    pub family: String,
    pub lambda: f64,
    pub n: usize,
    pub entries_compared: usize,
    /// Boundary matrices of the unrolled cobordism.
    pub unrolled: Vec<Vec<Vec<i64>>>,
    pub pass: bool,
}

/// Compares the Novikov boundary modulo `t^n` with the Morse complex of
/// `W_n`: entry `(t^b q, t^a p)` of the latter must be the coefficient of
/// `t^(b-a)` in entry `(q, p)` of the former.
pub fn truncation_tower_check(scene: &FlowScene, lambda: f64, n: usize) -> Result<TowerReport, NovikovError> {
    let w = unrolled_complex(scene, lambda, n)?;
    let unrolled: Vec<Vec<Vec<i64>>> = (1..w.num_degrees())
        .map(|k| {
            let d = w.boundary(k);
            (0..d.nrows()).map(|i| d.row(i).to_vec()).collect()
        })
        .collect();
    let mut compared = 0;
    if n > 0 {
        let nov = build_novikov_complex(scene, lambda, n)?;
        let base = bases(scene);
        for deg in 1..nov.complex.num_degrees() {
            let d = nov.complex.boundary(deg);
            let wd = w.boundary(deg);
            let (rows, cols) = (base[deg - 1].len(), base[deg].len());
            for b in 0..n {
                for a in 0..n {
                    for i in 0..rows {
                        for j in 0..cols {
                            let expected = if b >= a {
                                d.get(i, j).coeff((b - a) as i64).and_then(|c| c.to_i64()).ok_or_else(|| {
                                    NovikovError::PrecisionExhausted(format!("coefficient t^{} unknown", b - a))
                                })?
                            } else {
                                0
                            };
                            let got = *wd.get(b * rows + i, a * cols + j);
                            compared += 1;
                            if expected != got {
                                return Err(NovikovError::MismatchError {
                                    degree: deg,
                                    row: w.basis(deg - 1)[b * rows + i].clone(),
                                    col: w.basis(deg)[a * cols + j].clone(),
                                    detail: format!("unrolled {got}, truncated Novikov {expected}"),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(TowerReport { family: scene.family().to_string(), lambda, n, entries_compared: compared, unrolled, pass: true })
}
