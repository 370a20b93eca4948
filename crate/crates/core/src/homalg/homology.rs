use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::complex::{BasedComplex, ChainMap};
use super::snf::smith_normal_form;
use super::torsion::{qt_matrix, qt_rank};
use super::HomalgError;
use crate::rings::NovikovSeries;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeHomology {
    pub rank: usize,
    /// Invariant factors > 1, each dividing the next.
    pub torsion: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyReport {
    pub degrees: Vec<DegreeHomology>,
}

impl HomologyReport {
    pub fn betti(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.rank).collect()
    }

    pub fn is_free(&self) -> bool {
        self.degrees.iter().all(|d| d.torsion.is_empty())
    }
}

/// Integral homology from Smith normal forms of consecutive boundaries.
pub fn homology(c: &BasedComplex<i64>) -> HomologyReport {
    let n = c.num_degrees();
    let snfs: Vec<_> = (0..=n).map(|k| smith_normal_form(&c.boundary(k))).collect();
    let degrees = (0..n)
        .map(|k| {
            let rank = c.dim(k) - snfs[k].rank() - snfs[k + 1].rank();
            let torsion = snfs[k + 1].diag.iter().copied().filter(|&d| d > 1).collect();
            DegreeHomology { rank, torsion }
        })
        .collect();
    HomologyReport { degrees }
}

type Q = BigRational;

fn rational_columns(c: &BasedComplex<i64>, k: usize) -> Vec<Vec<Q>> {
    let d = c.boundary(k);
    (0..d.ncols()).map(|j| (0..d.nrows()).map(|i| Q::from_integer(BigInt::from(*d.get(i, j)))).collect()).collect()
}

/// Coordinates of `w` in the span of `basis`, if it lies there.
fn solve(basis: &[Vec<Q>], w: &[Q]) -> Option<Vec<Q>> {
    let n = w.len();
    let m = basis.len();
    // augmented n x (m + 1) system
    let mut a: Vec<Vec<Q>> = (0..n).map(|i| basis.iter().map(|b| b[i].clone()).chain([w[i].clone()]).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m {
        let Some(p) = (row..n).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for x in a[row].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..n {
            if i != row && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..=m {
                    let v = &a[row][j] * &f;
                    a[i][j] = &a[i][j] - v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if (row..n).any(|i| !a[i][m].is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); m];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = a[r][m].clone();
    }
    Some(x)
}

fn nullspace(cols: &[Vec<Q>], dim: usize) -> Vec<Vec<Q>> {
    let rows = cols.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<Q>> = (0..rows).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..dim {
        let Some(p) = (r..rows).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][col].recip();
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..dim {
                    let v = &a[r][j] * &f;
                    a[i][j] = &a[i][j] - v;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    (0..dim)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::zero(); dim];
            v[free] = Q::one();
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[ri][free].clone();
            }
            v
        })
        .collect()
}

/// Boundaries followed by cycle representatives of a basis of `H_k(C; Q)`.
fn homology_basis(c: &BasedComplex<i64>, k: usize) -> (Vec<Vec<Q>>, usize) {
    let dim = c.dim(k);
    let mut span: Vec<Vec<Q>> = Vec::new();
    if k + 1 < c.num_degrees() {
        for b in rational_columns(c, k + 1) {
            if solve(&span, &b).is_none() {
                span.push(b);
            }
        }
    }
    let nb = span.len();
    let cycles = if k == 0 { (0..dim).map(|i| (0..dim).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect() } else { nullspace(&rational_columns(c, k), dim) };
    for z in cycles {
        if solve(&span, &z).is_none() {
            span.push(z);
        }
    }
    (span, nb)
}

/// Matrix of `H_k(f; Q)` in the cycle bases chosen from the reduced echelon
/// forms of source and target. When source and target coincide the bases
/// agree, so the matrix is that of the induced endomorphism.
pub fn homology_map(f: &ChainMap<i64>, k: usize) -> Vec<Vec<BigRational>> {
    let (sb, sn) = homology_basis(f.source(), k);
    let (tb, tn) = homology_basis(f.target(), k);
    let m = f.component(k);
    let cols: Vec<Vec<Q>> = sb[sn..]
        .iter()
        .map(|z| {
            let img: Vec<Q> = (0..m.nrows())
                .map(|i| (0..m.ncols()).fold(Q::zero(), |acc, j| acc + Q::from_integer(BigInt::from(*m.get(i, j))) * &z[j]))
                .collect();
            let x = solve(&tb, &img).expect("image of a cycle is a cycle");
            x[tn..].to_vec()
        })
        .collect();
    let r = tb.len() - tn;
    (0..r).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect()
}

/// Homology ranks over the field `Q((t))`.
pub fn novikov_homology_ranks(c: &BasedComplex<NovikovSeries>) -> Result<Vec<usize>, HomalgError> {
    let order = *c.ctx();
    let n = c.num_degrees();
    let mut ranks = vec![0usize; n + 1];
    for (k, r) in ranks.iter_mut().enumerate().skip(1).take(n.saturating_sub(1)) {
        *r = qt_rank(&qt_matrix(&c.boundary(k)), order, k)?;
    }
    Ok((0..n).map(|k| c.dim(k) - ranks[k] - ranks[k + 1]).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NovikovHomology {
    pub ranks: Vec<usize>,
    /// `true` when `H_k` has a non-free part: elimination of `d_{k+1}` over
    /// `Z((t))` with unit pivots stalls before reaching the `Q((t))`-rank.
    pub torsion_detected: Vec<bool>,
}

impl NovikovHomology {
    pub fn is_trivial(&self) -> bool {
        self.ranks.iter().all(|&r| r == 0) && !self.torsion_detected.iter().any(|&b| b)
    }
}

pub fn novikov_homology(c: &BasedComplex<NovikovSeries>) -> Result<NovikovHomology, HomalgError> {
    let ranks = novikov_homology_ranks(c)?;
    let order = *c.ctx();
    let n = c.num_degrees();
    let mut torsion_detected = vec![false; n];
    for (k, flag) in torsion_detected.iter_mut().enumerate() {
        if k + 1 >= n {
            break;
        }
        let d = c.boundary(k + 1);
        let full = qt_rank(&qt_matrix(&d), order, k + 1)?;
        *flag = unit_pivot_rank(&d) < full;
    }
    Ok(NovikovHomology { ranks, torsion_detected })
}

/// Number of pivots found by elimination over `Z((t))` using only entries
/// whose leading coefficient is `±1`.
fn unit_pivot_rank(m: &super::Matrix<NovikovSeries>) -> usize {
    let mut a: Vec<Vec<NovikovSeries>> = (0..m.nrows()).map(|i| m.row(i).to_vec()).collect();
    let mut rows: Vec<usize> = (0..m.nrows()).collect();
    let mut cols: Vec<usize> = (0..m.ncols()).collect();
    let mut rank = 0;
    loop {
        let pick = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| (i, j)))
            .filter(|&(i, j)| a[i][j].is_unit())
            .min_by_key(|&(i, j)| (a[i][j].valuation(), i, j));
        let Some((pi, pj)) = pick else { return rank };
        let inv = a[pi][pj].inverse().expect("unit");
        rows.retain(|&i| i != pi);
        cols.retain(|&j| j != pj);
        for &i in &rows {
            if a[i][pj].is_zero() {
                continue;
            }
            let f = &a[i][pj] * &inv;
            for &j in &cols {
                let v = &a[i][j] - &(&f * &a[pi][j]);
                a[i][j] = v;
            }
            a[i][pj] = NovikovSeries::zero();
        }
        rank += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homalg::{Matrix, RingElem};

    fn l(n: usize, p: &str) -> Vec<String> {
        (0..n).map(|i| format!("{p}{i}")).collect()
    }

    #[test]
    fn sphere_complex() {
        let c = BasedComplex::from_boundaries((), vec![l(1, "min"), vec![], l(1, "max")], vec![Matrix::zeros(1, 0), Matrix::zeros(0, 1)]).unwrap();
        assert_eq!(homology(&c).betti(), vec![1, 0, 1]);
    }

    #[test]
    fn homology_map_of_multiplication() {
        // circle with one vertex and one loop; the loop mapped to three times itself
        let c = BasedComplex::from_boundaries((), vec![l(1, "v"), l(1, "e")], vec![Matrix::zeros(1, 1)]).unwrap();
        let f = ChainMap::new(c.clone(), c, vec![Matrix::from_rows(vec![vec![1i64]]), Matrix::from_rows(vec![vec![3i64]])]).unwrap();
        let q = |n: i64| BigRational::from_integer(n.into());
        assert_eq!(homology_map(&f, 1), vec![vec![q(3)]]);
        assert_eq!(homology_map(&f, 0), vec![vec![q(1)]]);
    }

    #[test]
    fn homology_map_ignores_boundaries() {
        // two vertices joined by an edge; H_0 has rank one
        let c = BasedComplex::from_boundaries((), vec![l(2, "v"), l(1, "e")], vec![Matrix::from_rows(vec![vec![-1i64], vec![1]])]).unwrap();
        let swap = Matrix::from_rows(vec![vec![0i64, 1], vec![1, 0]]);
        let f = ChainMap::new(c.clone(), c, vec![swap, Matrix::from_rows(vec![vec![-1i64]])]).unwrap();
        assert_eq!(homology_map(&f, 0), vec![vec![BigRational::one()]]);
        assert!(homology_map(&f, 1).is_empty());
    }

    #[test]
    fn times_two() {
        let c = BasedComplex::from_boundaries((), vec![l(1, "a"), l(1, "b")], vec![Matrix::from_rows(vec![vec![2i64]])]).unwrap();
        let h = homology(&c);
        assert_eq!(h.degrees[0], DegreeHomology { rank: 0, torsion: vec![2] });
        assert_eq!(h.degrees[1], DegreeHomology { rank: 0, torsion: vec![] });
    }

    fn one_by_one(u: NovikovSeries) -> BasedComplex<NovikovSeries> {
        BasedComplex::from_boundaries(16, vec![l(1, "a"), l(1, "b")], vec![Matrix::from_rows(vec![vec![u]])]).unwrap()
    }

    #[test]
    fn novikov_zero_complex() {
        let c = BasedComplex::<NovikovSeries>::zero_complex(16);
        assert_eq!(novikov_homology_ranks(&c).unwrap(), vec![0]);
    }

    #[test]
    fn novikov_unit_boundary() {
        let c = one_by_one(NovikovSeries::from_i64_terms(&[(0, 1), (1, -1)], 16));
        let h = novikov_homology(&c).unwrap();
        assert_eq!(h.ranks, vec![0, 0]);
        assert!(h.is_trivial());
    }

    #[test]
    fn novikov_non_unit_boundary() {
        let c = one_by_one(NovikovSeries::from_i64_terms(&[(1, 2), (2, -1)], 16));
        let h = novikov_homology(&c).unwrap();
        assert_eq!(h.ranks, vec![0, 0]);
        assert_eq!(h.torsion_detected, vec![true, false]);
    }

    #[test]
    fn novikov_ring_elem_identity() {
        let one = <NovikovSeries as RingElem>::one(&8);
        assert!(one.mul(&one).agrees_to(&one, 8));
    }
}
