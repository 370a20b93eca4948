use rand::seq::SliceRandom;
use rand::Rng;

use super::complex::{BasedComplex, ChainMap};
use super::matrix::Matrix;
use super::{HomalgError, RingElem};
use crate::rings::{normalize_torsion, NovikovSeries, RationalLaurent, WittUnit};

type Rl = RationalLaurent;

pub(crate) fn qt_matrix(m: &Matrix<NovikovSeries>) -> Matrix<Rl> {
    m.map(NovikovSeries::to_rational)
}

/// Minimum-valuation pivot among the nonzero entries of `rows x cols`.
fn pick_pivot(a: &[Vec<Rl>], rows: &[usize], cols: &[usize]) -> Option<(usize, usize)> {
    rows.iter()
        .flat_map(|&i| cols.iter().map(move |&j| (i, j)))
        .filter(|&(i, j)| !a[i][j].is_zero())
        .min_by_key(|&(i, j)| (a[i][j].valuation(), i, j))
}

fn rows_of(m: &Matrix<Rl>) -> Vec<Vec<Rl>> {
    (0..m.nrows()).map(|i| m.row(i).to_vec()).collect()
}

/// Gaussian elimination over `Q((t))`; returns the number of pivots and
/// the signed product of pivots.
fn eliminate(m: &Matrix<Rl>) -> (usize, Option<Rl>, usize) {
    let mut a = rows_of(m);
    let mut rows: Vec<usize> = (0..m.nrows()).collect();
    let mut cols: Vec<usize> = (0..m.ncols()).collect();
    let mut prod: Option<Rl> = None;
    let mut sign_swaps = 0usize;
    let mut rank = 0;
    while let Some((pi, pj)) = pick_pivot(&a, &rows, &cols) {
        // position of the pivot within the remaining block decides the sign
        let ri = rows.iter().position(|&i| i == pi).unwrap();
        let cj = cols.iter().position(|&j| j == pj).unwrap();
        sign_swaps += ri + cj;
        rows.remove(ri);
        cols.remove(cj);
        let p = a[pi][pj].clone();
        let pinv = p.inverse().expect("nonzero pivot");
        for &i in &rows {
            if a[i][pj].is_zero() {
                continue;
            }
            let f = &a[i][pj] * &pinv;
            for &j in &cols {
                if !a[pi][j].is_zero() {
                    a[i][j] = &a[i][j] - &(&f * &a[pi][j]);
                }
            }
            a[i][pj] = Rl::zero();
        }
        prod = Some(match prod {
            None => p,
            Some(q) => &q * &p,
        });
        rank += 1;
    }
    (rank, prod, sign_swaps)
}

pub(crate) fn qt_rank(m: &Matrix<Rl>, _order: usize, _degree: usize) -> Result<usize, HomalgError> {
    Ok(eliminate(m).0)
}

/// Determinant over `Q((t))` by elimination with minimum-valuation pivots.
/// Singular matrices give the exact zero; the empty matrix gives `None`
/// (an exact one).
pub fn laurent_det(m: &Matrix<Rl>) -> Option<Rl> {
    assert_eq!(m.nrows(), m.ncols(), "determinant of a non-square matrix");
    let (rank, prod, swaps) = eliminate(m);
    if rank < m.nrows() {
        return Some(Rl::zero());
    }
    let prod = prod?;
    Some(if swaps % 2 == 1 {
        -prod
    } else {
        prod
    })
}

/// Greedy choice of columns (scanned in `order`) whose restriction to
/// `rows` is invertible. Stops once `rows.len()` columns are found.
fn select_columns(m: &Matrix<Rl>, rows: &[usize], order: &[usize]) -> Vec<usize> {
    let mut basis: Vec<(Vec<Rl>, usize)> = Vec::new();
    let mut chosen = Vec::new();
    for &j in order {
        if chosen.len() == rows.len() {
            break;
        }
        let mut v: Vec<Rl> = rows.iter().map(|&i| m.get(i, j).clone()).collect();
        for (b, p) in &basis {
            if v[*p].is_zero() {
                continue;
            }
            let f = &v[*p] / &b[*p];
            for (x, y) in v.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x = &*x - &(&f * y);
                }
            }
        }
        let piv = (0..v.len()).filter(|&i| !v[i].is_zero()).min_by_key(|&i| (v[i].valuation(), i));
        if let Some(p) = piv {
            basis.push((v, p));
            chosen.push(j);
        }
    }
    chosen
}

/// Precision for constants mixed into computations with `m`, high enough
/// never to be the limiting factor.
fn working_order(m: &Matrix<Rl>) -> usize {
    let (mut lo, mut hi) = (0i64, 0i64);
    for (_, _, v) in m.triplets() {
        lo = lo.min(v.valuation());
        hi = hi.max(v.abs_precision().unwrap_or(0));
    }
    (hi - lo) as usize * (m.nrows() + 1) + 1
}

/// Inverse over `Q((t))` by Gauss-Jordan elimination.
fn invert(m: &Matrix<Rl>) -> Matrix<Rl> {
    let n = m.nrows();
    let mut a = rows_of(m);
    let mut inv = rows_of(&Matrix::identity(n, &working_order(m)));
    for c in 0..n {
        let p = (c..n).filter(|&i| !a[i][c].is_zero()).min_by_key(|&i| (a[i][c].valuation(), i)).expect("invertible minor");
        a.swap(c, p);
        inv.swap(c, p);
        let pinv = a[c][c].inverse().expect("nonzero pivot");
        for j in 0..n {
            a[c][j] = &a[c][j] * &pinv;
            inv[c][j] = &inv[c][j] * &pinv;
        }
        for i in 0..n {
            if i == c || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in 0..n {
                a[i][j] = &a[i][j] - &(&f * &a[c][j]);
                inv[i][j] = &inv[i][j] - &(&f * &inv[c][j]);
            }
        }
    }
    Matrix::from_rows(inv)
}

/// Chain contraction `G_k: C_k -> C_{k+1}` of an acyclic complex over
/// `Q((t))`, built from a choice of column sets `J_k` of `d_k` such that
/// `d_k[I_{k-1}, J_k]` is invertible, with `I_{k-1}` the complement of
/// `J_{k-1}`. Then `G_{k-1} = embed_J o d_k[I, J]^{-1} o restrict_I`,
/// which satisfies `G G = 0` and `dG + Gd = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Contraction {
    columns: Vec<Vec<usize>>,
    minors: Vec<Matrix<Rl>>,
    gammas: Vec<Matrix<Rl>>,
}

impl Contraction {
    pub fn new(c: &BasedComplex<NovikovSeries>) -> Result<Self, HomalgError> {
        let orders: Vec<Vec<usize>> = (0..c.num_degrees()).map(|k| (0..c.dim(k)).collect()).collect();
        Self::with_column_orders(c, &orders)
    }

    /// Scans the columns of each `d_k` in a random order.
    pub fn randomized(c: &BasedComplex<NovikovSeries>, rng: &mut impl Rng) -> Result<Self, HomalgError> {
        let orders: Vec<Vec<usize>> = (0..c.num_degrees())
            .map(|k| {
                let mut o: Vec<usize> = (0..c.dim(k)).collect();
                o.shuffle(rng);
                o
            })
            .collect();
        Self::with_column_orders(c, &orders)
    }

    pub fn with_column_orders(c: &BasedComplex<NovikovSeries>, orders: &[Vec<usize>]) -> Result<Self, HomalgError> {
        let n = c.num_degrees();
        let mut columns = vec![Vec::new()];
        let mut minors = vec![Matrix::zeros(0, 0)];
        let mut gammas = Vec::new();
        for k in 1..=n {
            let prev_j = &columns[k - 1];
            let i_prev: Vec<usize> = (0..c.dim(k - 1)).filter(|x| !prev_j.contains(x)).collect();
            if k == n {
                if !i_prev.is_empty() {
                    return Err(HomalgError::NotAcyclic { degree: k - 1, rank: i_prev.len() });
                }
                gammas.push(Matrix::zeros(0, c.dim(k - 1)));
                break;
            }
            let d = qt_matrix(&c.boundary(k));
            let j_k = select_columns(&d, &i_prev, &orders[k]);
            if j_k.len() < i_prev.len() {
                return Err(HomalgError::NotAcyclic { degree: k - 1, rank: i_prev.len() - j_k.len() });
            }
            let minor = d.permuted(&i_prev, &j_k);
            let minv = invert(&minor);
            let mut g = Matrix::zeros(c.dim(k), c.dim(k - 1));
            for (a, &jj) in j_k.iter().enumerate() {
                for (b, &ii) in i_prev.iter().enumerate() {
                    g.set(jj, ii, minv.get(a, b).clone());
                }
            }
            columns.push(j_k);
            minors.push(minor);
            gammas.push(g);
        }
        Ok(Self { columns, minors, gammas })
    }

    /// `G_k: C_k -> C_{k+1}`.
    pub fn gamma(&self, k: usize) -> &Matrix<Rl> {
        &self.gammas[k]
    }

    /// The column set `J_k` of `d_k`.
    pub fn columns(&self, k: usize) -> &[usize] {
        &self.columns[k]
    }

    /// Checks `G G = 0` and `dG + Gd = 1` modulo `t^order`.
    pub fn verify(&self, c: &BasedComplex<NovikovSeries>, order: usize) -> bool {
        let n = c.num_degrees();
        for k in 0..n {
            let d_k = qt_matrix(&c.boundary(k));
            let d_up = qt_matrix(&c.boundary(k + 1));
            let g_k = &self.gammas[k];
            let mut phi = d_up.mul(g_k);
            if k > 0 {
                let gd = self.gammas[k - 1].mul(&d_k);
                phi = add(&phi, &gd);
            }
            if !phi.sub(&Matrix::identity(c.dim(k), &order)).is_negligible(&order) {
                return false;
            }
            if k + 1 < n && !self.gammas[k + 1].mul(g_k).is_negligible(&order) {
                return false;
            }
        }
        true
    }
}

fn add(a: &Matrix<Rl>, b: &Matrix<Rl>) -> Matrix<Rl> {
    a.sub(&b.neg())
}

fn integral_unit(det: Rl, order: usize, degree: usize) -> Result<WittUnit, HomalgError> {
    let z = det.to_integer().ok_or_else(|| HomalgError::NotAUnit(det.to_string()))?;
    if !z.is_unit() {
        return Err(HomalgError::NotAUnit(z.to_string()));
    }
    if z.order() < order {
        return Err(HomalgError::PrecisionExhausted { degree, order });
    }
    Ok(normalize_torsion(&z)?.truncate(order))
}

/// `det((d + G)_odd: C_odd -> C_even)` modulo `±t^k`, known to order `N`
/// (the precision order of the complex). With this convention a single
/// boundary `u: C_1 -> C_0` has torsion `u` and `u: C_2 -> C_1` has `u^{-1}`.
pub fn torsion_with_contraction(c: &BasedComplex<NovikovSeries>, g: &Contraction) -> Result<WittUnit, HomalgError> {
    torsion_with_contraction_to(c, g, *c.ctx())
}

fn torsion_with_contraction_to(c: &BasedComplex<NovikovSeries>, g: &Contraction, order: usize) -> Result<WittUnit, HomalgError> {
    let n = c.num_degrees();
    let offsets = |parity: usize| {
        let mut off = vec![usize::MAX; n];
        let mut acc = 0;
        for (k, o) in off.iter_mut().enumerate() {
            if k % 2 == parity {
                *o = acc;
                acc += c.dim(k);
            }
        }
        (off, acc)
    };
    let (odd, n_odd) = offsets(1);
    let (even, n_even) = offsets(0);
    if n_odd != n_even {
        return Err(HomalgError::NotAcyclic { degree: 0, rank: n_odd.abs_diff(n_even) });
    }
    let mut m = Matrix::zeros(n_even, n_odd);
    for k in (1..n).step_by(2) {
        let d = qt_matrix(&c.boundary(k));
        for (i, j, v) in d.triplets() {
            m.set(even[k - 1] + i, odd[k] + j, v.clone());
        }
        if k + 1 < n {
            for (i, j, v) in g.gamma(k).triplets() {
                m.set(even[k + 1] + i, odd[k] + j, v.clone());
            }
        }
    }
    let det = laurent_det(&m).unwrap_or_else(|| Rl::one(order));
    integral_unit(det, order, n.saturating_sub(1))
}

/// Torsion via the default contraction.
pub fn torsion(c: &BasedComplex<NovikovSeries>) -> Result<WittUnit, HomalgError> {
    torsion_with_contraction(c, &Contraction::new(c)?)
}

/// Torsion known to order `order`, for complexes built with extra
/// precision to absorb losses in the elimination.
pub fn torsion_to(c: &BasedComplex<NovikovSeries>, order: usize) -> Result<WittUnit, HomalgError> {
    torsion_with_contraction_to(c, &Contraction::new(c)?, order)
}

/// Independent route: alternating product of the minors `d_k[I_{k-1}, J_k]`.
pub fn torsion_by_minors(c: &BasedComplex<NovikovSeries>) -> Result<WittUnit, HomalgError> {
    let g = Contraction::new(c)?;
    let mut acc: Option<Rl> = None;
    for (k, minor) in g.minors.iter().enumerate().skip(1) {
        let Some(d) = laurent_det(minor) else { continue };
        let d = if k % 2 == 1 { d } else { d.inverse()? };
        acc = Some(match acc {
            None => d,
            Some(a) => &a * &d,
        });
    }
    let order = *c.ctx();
    integral_unit(acc.unwrap_or_else(|| Rl::one(order)), order, c.num_degrees().saturating_sub(1))
}

/// `Cone(f)_k = S_{k-1} + T_k` with `d = [[-d_S, 0], [f, d_T]]`.
pub fn mapping_cone<R: RingElem>(f: &ChainMap<R>) -> Result<BasedComplex<R>, HomalgError> {
    let s = f.source();
    let t = f.target();
    let top = s.top_degree().max(t.top_degree()) + 1;
    let ctx = t.ctx().clone();
    let mut bases = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let mut b: Vec<String> = Vec::new();
        if k > 0 {
            b.extend(s.basis(k - 1).iter().map(|x| format!("s:{x}")));
        }
        b.extend(t.basis(k).iter().map(|x| format!("t:{x}")));
        bases.push(b);
    }
    let mut upper = Vec::with_capacity(top);
    for k in 1..=top {
        let (sa, ta) = (if k >= 2 { s.dim(k - 2) } else { 0 }, t.dim(k - 1));
        let (sb, tb) = (s.dim(k - 1), t.dim(k));
        let mut m = Matrix::zeros(sa + ta, sb + tb);
        if k >= 2 {
            for (i, j, v) in s.boundary(k - 1).triplets() {
                m.set(i, j, v.neg());
            }
        }
        if k - 1 < f.components().len() {
            for (i, j, v) in f.component(k - 1).triplets() {
                m.set(sa + i, j, v.clone());
            }
        }
        for (i, j, v) in t.boundary(k).triplets() {
            m.set(sa + i, sb + j, v.clone());
        }
        upper.push(m);
    }
    BasedComplex::from_boundaries(ctx, bases, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::normalize_torsion;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const N: usize = 10;

    fn s(terms: &[(i64, i64)]) -> NovikovSeries {
        NovikovSeries::from_i64_terms(terms, 40)
    }

    fn labels(n: usize, p: &str) -> Vec<String> {
        (0..n).map(|i| format!("{p}{i}")).collect()
    }

    fn one_step(u: NovikovSeries, upper: bool) -> BasedComplex<NovikovSeries> {
        let m = Matrix::from_rows(vec![vec![u]]);
        if upper {
            BasedComplex::from_boundaries(N, vec![vec![], labels(1, "a"), labels(1, "b")], vec![Matrix::zeros(0, 1), m]).unwrap()
        } else {
            BasedComplex::from_boundaries(N, vec![labels(1, "a"), labels(1, "b")], vec![m]).unwrap()
        }
    }

    #[test]
    fn degree_conventions() {
        let u = s(&[(0, 1), (1, -1)]);
        let low = torsion(&one_step(u.clone(), false)).unwrap();
        assert_eq!(low, normalize_torsion(&u).unwrap().truncate(N));
        let high = torsion(&one_step(-&u.shift(3), true)).unwrap();
        assert_eq!(high, normalize_torsion(&u.inverse().unwrap()).unwrap().truncate(N));
    }

    #[test]
    fn non_unit_rejected() {
        let c = one_step(s(&[(0, 2), (1, 1)]), false);
        assert!(matches!(torsion(&c), Err(HomalgError::NotAUnit(_))));
    }

    #[test]
    fn non_acyclic_rejected() {
        let c = one_step(NovikovSeries::zero(), false);
        assert!(matches!(torsion(&c), Err(HomalgError::NotAcyclic { .. })));
    }

    /// Three-term acyclic complex `Z((t))^1 <- ^2 <- ^1` with a non-trivial
    /// contraction choice.
    fn three_term() -> BasedComplex<NovikovSeries> {
        let a = s(&[(0, 1), (1, -2)]);
        let b = s(&[(1, 1)]);
        let c = s(&[(0, 1), (1, 1)]);
        let d1 = Matrix::from_rows(vec![vec![a.clone(), b.clone()]]);
        let d2 = Matrix::from_rows(vec![vec![-&(&b * &c)], vec![&a * &c]]);
        BasedComplex::from_boundaries(N, vec![labels(1, "x"), labels(2, "y"), labels(1, "z")], vec![d1, d2]).unwrap()
    }

    #[test]
    fn contraction_identities_and_routes_agree() {
        let c = three_term();
        let g = Contraction::new(&c).unwrap();
        assert!(g.verify(&c, N));
        let t1 = torsion(&c).unwrap();
        let t2 = torsion_by_minors(&c).unwrap();
        assert_eq!(t1, t2);
        let expected = normalize_torsion(&s(&[(0, 1), (1, 1)]).inverse().unwrap()).unwrap();
        assert_eq!(t1, expected.truncate(N));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let g = Contraction::randomized(&c, &mut rng).unwrap();
            assert!(g.verify(&c, N));
            let t = torsion_with_contraction(&c, &g).unwrap();
            assert_eq!(t, t1);
        }
    }

    #[test]
    fn cone_of_identity_is_acyclic_with_trivial_torsion() {
        let c = three_term();
        let id = ChainMap::identity(&c);
        let cone = mapping_cone(&id).unwrap();
        assert_eq!(cone.top_degree(), 3);
        let t = torsion(&cone).unwrap();
        assert!(t.is_one());
    }

    #[test]
    fn det_small() {
        let m = Matrix::from_rows(vec![
            vec![s(&[(0, 1)]).to_rational(), s(&[(1, 1)]).to_rational()],
            vec![s(&[(1, 1)]).to_rational(), s(&[(0, 1)]).to_rational()],
        ]);
        let d = laurent_det(&m).unwrap().to_integer().unwrap();
        assert!(d.agrees_to(&s(&[(0, 1), (2, -1)]), 30));
    }
}
