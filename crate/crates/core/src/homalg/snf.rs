use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::Matrix;

/// `left * m * right = diag(d_1, ..., d_r, 0, ...)` with `d_i | d_{i+1}`,
/// `d_i > 0`, and `left`, `right` unimodular.
#[derive(Clone, Debug, PartialEq)]
pub struct SmithForm {
    pub diag: Vec<i64>,
    pub left: Matrix<BigInt>,
    pub right: Matrix<BigInt>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.diag.len()
    }
}

type Rows = Vec<Vec<BigInt>>;

/// Replaces rows `i`, `j` of `m` by `(a r_i + b r_j, c r_i + d r_j)`.
fn mix_rows(m: &mut Rows, i: usize, j: usize, [a, b, c, d]: &[BigInt; 4]) {
    for k in 0..m[i].len() {
        let (x, y) = (m[i][k].clone(), m[j][k].clone());
        m[i][k] = a * &x + b * &y;
        m[j][k] = c * &x + d * &y;
    }
}

fn mix_cols(m: &mut Rows, i: usize, j: usize, [a, b, c, d]: &[BigInt; 4]) {
    for r in m.iter_mut() {
        let (x, y) = (r[i].clone(), r[j].clone());
        r[i] = a * &x + b * &y;
        r[j] = c * &x + d * &y;
    }
}

/// Unimodular `[[x, y], [-q/g, p/g]]` sending `(p, q)` to `(g, 0)`.
fn bezout(p: &BigInt, q: &BigInt) -> [BigInt; 4] {
    if q.is_multiple_of(p) {
        return [BigInt::one(), BigInt::zero(), -(q / p), BigInt::one()];
    }
    let e = p.extended_gcd(q);
    [e.x, e.y, -(q / &e.gcd), p / &e.gcd]
}

fn identity(n: usize) -> Rows {
    (0..n).map(|i| (0..n).map(|j| BigInt::from(u8::from(i == j))).collect()).collect()
}

fn transpose(m: &Rows, cols: usize) -> Rows {
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn smith_normal_form(m: &Matrix<i64>) -> SmithForm {
    let (rows, cols) = m.shape();
    let mut a: Rows = (0..rows).map(|i| m.row(i).iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut left = identity(rows);
    // right is kept transposed so column operations become row operations
    let mut right_t = identity(cols);
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        let pivot = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !a[i][j].is_zero())
            .min_by_key(|&(i, j)| (a[i][j].abs(), i, j));
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        left.swap(t, pi);
        for r in a.iter_mut() {
            r.swap(t, pj);
        }
        right_t.swap(t, pj);
        loop {
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let b = bezout(&a[t][t], &a[i][t]);
                    mix_rows(&mut a, t, i, &b);
                    mix_rows(&mut left, t, i, &b);
                }
            }
            let mut clean = true;
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let b = bezout(&a[t][t], &a[t][j]);
                    mix_cols(&mut a, t, j, &b);
                    mix_rows(&mut right_t, t, j, &b);
                    clean = false;
                }
            }
            if !clean && (t + 1..rows).any(|i| !a[i][t].is_zero()) {
                continue;
            }
            // pivot must divide the whole trailing block
            let p = a[t][t].clone();
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a[i][j].is_multiple_of(&p)));
            match bad {
                Some(i) => {
                    let one = [BigInt::one(), BigInt::one(), BigInt::zero(), BigInt::one()];
                    mix_rows(&mut a, t, i, &one);
                    mix_rows(&mut left, t, i, &one);
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut().chain(left[t].iter_mut()) {
                *x = -&*x;
            }
        }
        diag.push(a[t][t].to_i64().expect("invariant factor overflow"));
    }
    SmithForm { diag, left: Matrix::from_rows(left), right: Matrix::from_rows(transpose(&right_t, cols)) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_3() {
        let s = smith_normal_form(&Matrix::<i64>::identity(3, &()));
        assert_eq!(s.diag, vec![1, 1, 1]);
    }

    #[test]
    fn zero_matrix() {
        assert!(smith_normal_form(&Matrix::<i64>::zeros(2, 3)).diag.is_empty());
    }

    #[test]
    fn diag_2_3() {
        // gcd of entries 1, det 6
        let m = Matrix::from_rows(vec![vec![2i64, 0], vec![0, 3]]);
        let s = smith_normal_form(&m);
        assert_eq!(s.diag, vec![1, 6]);
        let big = Matrix::from_rows(vec![vec![BigInt::from(2), BigInt::zero()], vec![BigInt::zero(), BigInt::from(3)]]);
        let d = s.left.mul(&big).mul(&s.right);
        let want = Matrix::from_rows(vec![vec![BigInt::one(), BigInt::zero()], vec![BigInt::zero(), BigInt::from(6)]]);
        assert_eq!(d, want);
    }
}
