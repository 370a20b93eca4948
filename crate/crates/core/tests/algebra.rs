use morsekit_core::homalg::{mapping_cone, smith_normal_form, torsion, torsion_by_minors, BasedComplex, ChainMap, Matrix};
use morsekit_core::rings::{series_exp, series_log, NovikovSeries, TruncatedSeries, WittUnit};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

const N: usize = 10;

fn series() -> impl Strategy<Value = NovikovSeries> {
    (-2i64..3, prop::collection::vec(-5i64..6, 1..6)).prop_map(|(v, c)| {
        let terms: Vec<(i64, i64)> = c.iter().enumerate().map(|(i, &x)| (v + i as i64, x)).collect();
        NovikovSeries::from_i64_terms(&terms, N as i64)
    })
}

/// `1 + a_1 t + ... ` with small integer coefficients.
fn unit() -> impl Strategy<Value = NovikovSeries> {
    prop::collection::vec(-4i64..5, 0..5).prop_map(|c| {
        let mut terms = vec![(0, 1)];
        terms.extend(c.iter().enumerate().map(|(i, &x)| (i as i64 + 1, x)));
        NovikovSeries::from_i64_terms(&terms, 40)
    })
}

fn same(a: &NovikovSeries, b: &NovikovSeries) -> bool {
    (a - b).vanishes_to(N as i64 - 4)
}

proptest! {
    #[test]
    fn ring_axioms(a in series(), b in series(), c in series()) {
        prop_assert!(same(&(&a + &b), &(&b + &a)));
        prop_assert!(same(&(&a * &b), &(&b * &a)));
        prop_assert!(same(&(&(&a + &b) + &c), &(&a + &(&b + &c))));
        prop_assert!(same(&(&(&a * &b) * &c), &(&a * &(&b * &c))));
        prop_assert!(same(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c))));
        prop_assert!(same(&(&a - &a), &NovikovSeries::zero()));
    }

    #[test]
    fn units_invert(u in unit(), k in -3i64..4) {
        let x = u.shift(k);
        let prod = &x * &x.inverse().unwrap();
        prop_assert!(same(&prod, &NovikovSeries::one(N)));
    }

    #[test]
    fn exp_and_log_are_inverse(c in prop::collection::vec(-6i64..7, 1..9)) {
        let mut coeffs = vec![BigInt::from(1)];
        coeffs.extend(c.iter().map(|&x| BigInt::from(x)));
        coeffs.resize(N, BigInt::from(0));
        let u = WittUnit::new(TruncatedSeries::new(coeffs)).unwrap();
        let l = series_log(&u);
        prop_assert_eq!(series_exp(&l).unwrap(), u.clone());
        // log is a homomorphism to the additive group
        let sq = series_log(&u.mul(&u));
        prop_assert_eq!(sq, &l + &l);
        let zero = TruncatedSeries::new(vec![BigRational::from_integer(0.into()); N]);
        prop_assert_eq!(series_log(&u.mul(&u.inverse())), zero);
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

/// Fraction-free determinant.
fn det(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    (k - 1..n).flat_map(|last| subsets(last, k - 1).into_iter().map(move |mut s| { s.push(last); s })).collect()
}

/// Invariant factors as quotients of successive gcds of `k x k` minors.
fn minor_gcd_factors(m: &[Vec<i64>]) -> Vec<i64> {
    let (r, c) = (m.len(), m[0].len());
    let mut out = Vec::new();
    let mut prev = 1i128;
    for k in 1..=r.min(c) {
        let mut g = 0i128;
        for rows in subsets(r, k) {
            for cols in subsets(c, k) {
                let sub: Vec<Vec<i128>> = rows.iter().map(|&i| cols.iter().map(|&j| m[i][j] as i128).collect()).collect();
                g = gcd(g, det(&sub));
            }
        }
        if g == 0 {
            break;
        }
        out.push((g / prev) as i64);
        prev = g;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn smith_form_matches_minor_gcds(rows in 1usize..=6, cols in 1usize..=6, seed in prop::collection::vec(-9i64..=9, 36)) {
        let m: Vec<Vec<i64>> = (0..rows).map(|i| (0..cols).map(|j| seed[i * 6 + j]).collect()).collect();
        let s = smith_normal_form(&Matrix::from_rows(m.clone()));
        prop_assert_eq!(s.diag.clone(), minor_gcd_factors(&m));
        let big = Matrix::from_rows(m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect());
        let prod = s.left.mul(&big).mul(&s.right);
        for i in 0..rows {
            for j in 0..cols {
                let want = if i == j && i < s.diag.len() { s.diag[i] } else { 0 };
                prop_assert_eq!(prod.get(i, j), &BigInt::from(want));
            }
        }
    }
}

fn two_term(u: &NovikovSeries) -> BasedComplex<NovikovSeries> {
    let m = Matrix::from_rows(vec![vec![u.clone()]]);
    BasedComplex::from_boundaries(N, vec![vec!["a".into()], vec!["b".into()]], vec![m]).unwrap()
}

/// Chain isomorphism `C_u -> C_v` that is `p` in degree one.
fn iso(u: &NovikovSeries, v: &NovikovSeries, p: &NovikovSeries) -> ChainMap<NovikovSeries> {
    let f0 = &(v * p) * &u.inverse().unwrap();
    ChainMap::new(two_term(u), two_term(v), vec![Matrix::from_rows(vec![vec![f0]]), Matrix::from_rows(vec![vec![p.clone()]])]).unwrap()
}

proptest! {
    #[test]
    fn torsion_is_multiplicative(u in unit(), v in unit(), w in unit(), p in unit(), q in unit(), k in -2i64..3) {
        let f = iso(&u, &v, &p.shift(k));
        let g = iso(&w, &u, &q);
        let fg = f.compose(&g).unwrap();
        let tf = torsion(&mapping_cone(&f).unwrap()).unwrap();
        let tg = torsion(&mapping_cone(&g).unwrap()).unwrap();
        let tfg = torsion(&mapping_cone(&fg).unwrap()).unwrap();
        prop_assert_eq!(tfg.truncate(N - 4), tf.mul(&tg).truncate(N - 4));
    }

    #[test]
    fn contraction_and_minor_routes_agree(u in unit(), v in unit(), p in unit()) {
        let cone = mapping_cone(&iso(&u, &v, &p)).unwrap();
        prop_assert_eq!(torsion(&cone).unwrap(), torsion_by_minors(&cone).unwrap());
    }
}
