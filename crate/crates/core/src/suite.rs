//! The acceptance battery: every check recomputes its inputs from the
//! shipped scenes and compares against an independent oracle.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::flow::{validate_f_gradient, FieldTweak, FlowScene};
use crate::homalg::{mapping_cone, smith_normal_form, torsion, torsion_by_minors, BasedComplex, ChainMap, Matrix, RingElem};
use crate::morse::{build_morse_complex, induced_map, stability_experiment, SurfaceMap};
use crate::novikov::{build_novikov_complex, truncation_tower_check, NovikovComplex};
use crate::rings::{series_exp, series_log, NovikovSeries, TruncatedSeries, WittUnit};
use crate::verify::check_torsion_zeta;
use crate::zeta::{zeta, DEFAULT_RESOLUTION};

/// Two levels in one regular interval of `torus_circle_valued`.
pub const LEVELS: [f64; 2] = [1.06, 1.43];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub order: usize,
    pub delta: f64,
    pub trials: usize,
    pub tolerance_scale: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 0, order: 8, delta: 1e-3, trials: 20, tolerance_scale: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub criteria: Vec<CriterionResult>,
    pub pass: bool,
}

type Check = Result<(bool, Value), String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn scene(name: &str, cfg: &SuiteConfig) -> Result<FlowScene, String> {
    let s = FlowScene::named(name).map_err(err)?;
    let n = s.numerics().with_tolerance_scale(cfg.tolerance_scale);
    Ok(s.with_numerics(n))
}

pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    let checks: [(&str, fn(&SuiteConfig) -> Check); 9] = [
        ("gradient validation", gradient_validation),
        ("Morse homology", morse_homology),
        ("C0-stability", stability),
        ("functoriality", functoriality),
        ("Novikov tower", novikov_tower),
        ("level independence", level_independence),
        ("zeta oracle", zeta_oracle),
        ("torsion-zeta identity", torsion_zeta),
        ("algebra properties", algebra),
    ];
    let criteria: Vec<CriterionResult> = checks
        .iter()
        .enumerate()
        .map(|(i, (name, f))| {
            let (pass, detail) = f(cfg).unwrap_or_else(|e| (false, json!({ "error": e })));
            CriterionResult { id: i + 1, name: name.to_string(), pass, detail }
        })
        .collect();
    let pass = criteria.iter().all(|c| c.pass);
    SuiteReport { criteria, pass }
}

fn gradient_validation(cfg: &SuiteConfig) -> Check {
    let mut detail = serde_json::Map::new();
    let mut pass = true;
    for name in ["sphere_height", "torus_product", "genus2_height"] {
        let r = validate_f_gradient(&scene(name, cfg)?).map_err(err)?;
        pass &= r.pass;
        detail.insert(name.into(), json!({ "condition_a": r.condition_a, "condition_b": r.condition_b }));
    }
    let base = scene("torus_product", cfg)?;
    let neg = validate_f_gradient(&base.with_tweak(FieldTweak::Negate).map_err(err)?).map_err(err)?;
    let center = base.critical_of_index(1)[0].position;
    let rot = base.with_tweak(FieldTweak::RotateSaddle { center, kappa: 40.0, radius: 0.05 }).map_err(err)?;
    let rot = validate_f_gradient(&rot).map_err(err)?;
    pass &= !neg.condition_a && !rot.condition_b;
    detail.insert("negated".into(), json!({ "condition_a": neg.condition_a, "violations": neg.a_violations }));
    let witness = rot.b_checks.iter().find(|b| !b.pass).map(|b| json!({ "id": b.id, "eigenvalues": b.eigenvalues }));
    detail.insert("rotated_saddle".into(), json!({ "condition_b": rot.condition_b, "witness": witness }));
    Ok((pass, Value::Object(detail)))
}

fn squares_to_zero<R: RingElem>(c: &BasedComplex<R>) -> bool {
    (2..c.num_degrees()).all(|k| c.boundary(k - 1).mul(&c.boundary(k)).is_negligible(c.ctx()))
}

fn morse_homology(cfg: &SuiteConfig) -> Check {
    let mut detail = serde_json::Map::new();
    let mut pass = true;
    for (name, want) in [("sphere_height", [1, 0, 1]), ("torus_product", [1, 2, 1]), ("genus2_height", [1, 4, 1])] {
        let m = build_morse_complex(&scene(name, cfg)?).map_err(err)?;
        let h = m.homology();
        let ok = h.betti() == want && h.is_free() && squares_to_zero(&m.complex);
        pass &= ok;
        detail.insert(name.into(), json!({ "betti": h.betti(), "incidences": m.incidences(), "pass": ok }));
    }
    Ok((pass, Value::Object(detail)))
}

fn stability(cfg: &SuiteConfig) -> Check {
    let mut detail = serde_json::Map::new();
    let mut pass = true;
    for name in ["torus_product", "genus2_height"] {
        let r = stability_experiment(&scene(name, cfg)?, cfg.delta, cfg.trials, cfg.seed).map_err(err)?;
        pass &= r.pass;
        let failures: Vec<_> = r.outcomes.iter().filter(|o| !o.identical).collect();
        detail.insert(name.into(), json!({ "identical": r.identical, "trials": r.trials, "failures": failures }));
    }
    Ok((pass, Value::Object(detail)))
}

fn commutes(f: &ChainMap<i64>) -> bool {
    (1..f.components().len()).all(|k| {
        f.target().boundary(k).mul(f.component(k)) == f.component(k - 1).mul(&f.source().boundary(k))
    })
}

fn is_permutation(m: &Matrix<i64>) -> bool {
    let (r, c) = m.shape();
    let ones = |v: Vec<i64>| v.iter().all(|&x| x == 0 || x == 1) && v.iter().sum::<i64>() == 1;
    r == c && (0..r).all(|i| ones(m.row(i).to_vec())) && (0..c).all(|j| ones((0..r).map(|i| *m.get(i, j)).collect()))
}

fn functoriality(cfg: &SuiteConfig) -> Check {
    let s = scene("torus_product_m2", cfg)?;
    let id = induced_map(&SurfaceMap::Identity, &s, &s).map_err(err)?;
    let id_ok = id.chain_map.components().iter().enumerate().all(|(k, c)| c == &Matrix::identity(s.critical_of_index(k).len(), &()));
    let half = induced_map(&SurfaceMap::named("half_shift").unwrap(), &s, &s).map_err(err)?;
    let perm_ok = half.chain_map.components().iter().all(is_permutation)
        && half.chain_map.components().iter().any(|c| c != &Matrix::identity(c.nrows(), &()));
    let t = scene("torus_product", cfg)?;
    let dbl = induced_map(&SurfaceMap::named("double_x").unwrap(), &t, &t).map_err(err)?;
    let h = dbl.on_homology();
    let two = BigRational::from_integer(BigInt::from(2));
    let h2_ok = h[2] == vec![vec![two]];
    let chain_ok = [&id, &half, &dbl].iter().all(|f| commutes(&f.chain_map));
    let comps = |f: &ChainMap<i64>| -> Vec<Vec<Vec<i64>>> {
        f.components().iter().map(|m| (0..m.nrows()).map(|i| m.row(i).to_vec()).collect()).collect()
    };
    let h2: Vec<String> = h[2].iter().flatten().map(|x| x.to_string()).collect();
    Ok((
        id_ok && perm_ok && h2_ok && chain_ok,
        json!({
            "identity": id_ok,
            "half_shift": { "permutation": perm_ok, "components": comps(&half.chain_map) },
            "double_x_on_h2": h2,
            "chain_map_identity": chain_ok,
        }),
    ))
}

fn novikov_tower(cfg: &SuiteConfig) -> Check {
    let mut detail = serde_json::Map::new();
    let mut pass = true;
    for name in ["torus_circle_valued", "torus_fibration"] {
        let s = scene(name, cfg)?;
        let mut compared = Vec::new();
        for n in 1..=4 {
            let r = truncation_tower_check(&s, LEVELS[0], n).map_err(err)?;
            pass &= r.pass;
            compared.push(r.entries_compared);
        }
        let c = build_novikov_complex(&s, LEVELS[0], cfg.order).map_err(err)?;
        let sq = squares_to_zero(&c.complex);
        pass &= sq;
        detail.insert(name.into(), json!({ "entries_compared": compared, "boundary_squared_zero": sq }));
    }
    Ok((pass, Value::Object(detail)))
}

fn table(c: &NovikovComplex) -> Vec<Vec<Vec<Vec<i64>>>> {
    c.coefficient_table()
}

fn level_independence(cfg: &SuiteConfig) -> Check {
    let s = scene("torus_circle_valued", cfg)?;
    let [a, b] = LEVELS.map(|l| build_novikov_complex(&s, l, cfg.order));
    let (a, b) = (a.map_err(err)?, b.map_err(err)?);
    let boundary_ok = table(&a) == table(&b) && a.complex.bases() == b.complex.bases();
    let [za, zb] = LEVELS.map(|l| zeta(&s, l, cfg.order, DEFAULT_RESOLUTION));
    let (za, zb) = (za.map_err(err)?, zb.map_err(err)?);
    let zeta_ok = za.counts == zb.counts && za.series == zb.series;
    Ok((
        boundary_ok && zeta_ok,
        json!({
            "levels": LEVELS,
            "boundary": table(&a),
            "boundary_identical": boundary_ok,
            "zeta": za.series.coeffs_i64(),
            "zeta_identical": zeta_ok,
        }),
    ))
}

/// Power series quotient `p / q` with `q(0) = 1`, through `t^(n-1)`.
fn divide(p: &[i64], q: &[i64], n: usize) -> Vec<i64> {
    let mut out = vec![0i64; n];
    for k in 0..n {
        let mut c = p.get(k).copied().unwrap_or(0);
        for j in 1..=k.min(q.len() - 1) {
            c -= q[j] * out[k - j];
        }
        out[k] = c;
    }
    out
}

/// `L(A^n) = 1 - tr(A^n) + det(A^n)` from the action on homology.
fn torus_lefschetz(a: [[i64; 2]; 2], n: usize) -> Vec<i64> {
    let mut p = [[1i64, 0], [0, 1]];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    (1..=n)
        .map(|k| {
            p = [
                [p[0][0] * a[0][0] + p[0][1] * a[1][0], p[0][0] * a[0][1] + p[0][1] * a[1][1]],
                [p[1][0] * a[0][0] + p[1][1] * a[1][0], p[1][0] * a[0][1] + p[1][1] * a[1][1]],
            ];
            1 - (p[0][0] + p[1][1]) + det.pow(k as u32)
        })
        .collect()
}

fn zeta_oracle(cfg: &SuiteConfig) -> Check {
    let n = cfg.order;
    let cat = zeta(&scene("cat_map", cfg)?, 0.0, n, DEFAULT_RESOLUTION).map_err(err)?;
    let cat_counts = torus_lefschetz([[2, 1], [1, 1]], n);
    let cat_series = divide(&[1, -3, 1], &[1, -2, 1], n + 1);
    let dbl = zeta(&scene("circle_doubling", cfg)?, 0.0, n, DEFAULT_RESOLUTION).map_err(err)?;
    // a degree-2 circle map acts by 1 on H_0 and by 2 on H_1
    let dbl_counts: Vec<i64> = (1..=n as u32).map(|k| 1 - 2i64.pow(k)).collect();
    let dbl_series = divide(&[1, -2], &[1, -1], n + 1);
    let ok = [
        cat.counts == cat_counts,
        cat.series.coeffs_i64() == cat_series,
        dbl.counts == dbl_counts,
        dbl.series.coeffs_i64() == dbl_series,
    ];
    Ok((
        ok.iter().all(|&x| x),
        json!({
            "cat_map": { "counts": cat.counts, "oracle_counts": cat_counts, "zeta": cat.series.coeffs_i64(), "oracle_zeta": cat_series },
            "circle_doubling": { "counts": dbl.counts, "oracle_counts": dbl_counts, "zeta": dbl.series.coeffs_i64(), "oracle_zeta": dbl_series },
        }),
    ))
}

fn torsion_zeta(cfg: &SuiteConfig) -> Check {
    let mut detail = serde_json::Map::new();
    let mut pass = true;
    for (name, lambda) in [("cat_map", 0.0), ("circle_doubling", 0.0), ("torus_circle_valued", LEVELS[0])] {
        let v = check_torsion_zeta(&scene(name, cfg)?, lambda, cfg.order).map_err(err)?;
        pass &= v.applicable && v.pass;
        let coeffs = |u: &Option<WittUnit>| u.as_ref().map(|u| u.coeffs_i64());
        detail.insert(
            name.into(),
            json!({ "w": coeffs(&v.w), "zeta": coeffs(&v.zeta), "product": coeffs(&v.product), "pass": v.pass }),
        );
    }
    Ok((pass, Value::Object(detail)))
}

const PRECISION: usize = 10;

fn random_series(rng: &mut ChaCha8Rng) -> NovikovSeries {
    let v = rng.gen_range(-2..3i64);
    let terms: Vec<(i64, i64)> = (0..rng.gen_range(1..6)).map(|i| (v + i, rng.gen_range(-5..6))).collect();
    NovikovSeries::from_i64_terms(&terms, PRECISION as i64)
}

fn random_unit(rng: &mut ChaCha8Rng) -> NovikovSeries {
    let mut terms = vec![(0, 1)];
    terms.extend((1..rng.gen_range(1..6)).map(|i| (i, rng.gen_range(-4..5))));
    NovikovSeries::from_i64_terms(&terms, 40)
}

fn ring_axioms(rng: &mut ChaCha8Rng, cases: usize) -> usize {
    let same = |a: &NovikovSeries, b: &NovikovSeries| (a - b).vanishes_to(PRECISION as i64 - 4);
    (0..cases)
        .filter(|_| {
            let (a, b, c) = (random_series(rng), random_series(rng), random_series(rng));
            same(&(&a + &b), &(&b + &a))
                && same(&(&a * &b), &(&b * &a))
                && same(&(&(&a + &b) + &c), &(&a + &(&b + &c)))
                && same(&(&(&a * &b) * &c), &(&a * &(&b * &c)))
                && same(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)))
        })
        .count()
}

fn exp_log(rng: &mut ChaCha8Rng, cases: usize) -> usize {
    (0..cases)
        .filter(|_| {
            let mut c = vec![BigInt::from(1)];
            c.extend((1..PRECISION).map(|_| BigInt::from(rng.gen_range(-6..7))));
            let Ok(u) = WittUnit::new(TruncatedSeries::new(c)) else { return false };
            let l = series_log(&u);
            series_exp(&l).is_ok_and(|e| e == u) && series_log(&u.mul(&u)) == &l + &l
        })
        .count()
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Fraction-free elimination.
fn bareiss_det(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    let (mut sign, mut prev) = (1, 1i128);
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(i) = (k + 1..n).find(|&i| a[i][k] != 0) else { return 0 };
            a.swap(k, i);
            sign = -sign;
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
    (k - 1..n)
        .flat_map(|last| {
            subsets(last, k - 1).into_iter().map(move |mut s| {
                s.push(last);
                s
            })
        })
        .collect()
}

/// Invariant factors as quotients of gcds of `k x k` minors.
fn minor_gcd_factors(m: &[Vec<i64>]) -> Vec<i64> {
    let (r, c) = (m.len(), m[0].len());
    let mut out = Vec::new();
    let mut prev = 1i128;
    for k in 1..=r.min(c) {
        let mut g = 0;
        for rows in subsets(r, k) {
            for cols in subsets(c, k) {
                g = gcd(g, bareiss_det(rows.iter().map(|&i| cols.iter().map(|&j| m[i][j] as i128).collect()).collect()));
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

fn smith_forms(rng: &mut ChaCha8Rng, cases: usize) -> usize {
    (0..cases)
        .filter(|_| {
            let (r, c) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
            let m: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(-9..=9)).collect()).collect();
            smith_normal_form(&Matrix::from_rows(m.clone())).diag == minor_gcd_factors(&m)
        })
        .count()
}

fn two_term(u: &NovikovSeries) -> BasedComplex<NovikovSeries> {
    let m = Matrix::from_rows(vec![vec![u.clone()]]);
    BasedComplex::from_boundaries(PRECISION, vec![vec!["a".into()], vec!["b".into()]], vec![m]).expect("two-term complex")
}

/// Chain isomorphism between one-dimensional acyclic complexes, `p` in degree one.
fn iso(u: &NovikovSeries, v: &NovikovSeries, p: &NovikovSeries) -> ChainMap<NovikovSeries> {
    let f0 = &(v * p) * &u.inverse().expect("unit");
    let comps = vec![Matrix::from_rows(vec![vec![f0]]), Matrix::from_rows(vec![vec![p.clone()]])];
    ChainMap::new(two_term(u), two_term(v), comps).expect("chain isomorphism")
}

fn torsion_products(rng: &mut ChaCha8Rng, cases: usize) -> usize {
    (0..cases)
        .filter(|_| {
            let [u, v, w, p, q] = [(); 5].map(|_| random_unit(rng));
            let f = iso(&u, &v, &p.shift(rng.gen_range(-2..3)));
            let g = iso(&w, &u, &q);
            let Ok(fg) = f.compose(&g) else { return false };
            let tau = |h: &ChainMap<NovikovSeries>| mapping_cone(h).ok().and_then(|c| torsion(&c).ok());
            let (Some(tf), Some(tg), Some(tfg)) = (tau(&f), tau(&g), tau(&fg)) else { return false };
            let minors = mapping_cone(&f).ok().and_then(|c| torsion_by_minors(&c).ok());
            tfg.truncate(PRECISION - 4) == tf.mul(&tg).truncate(PRECISION - 4) && minors.as_ref() == Some(&tf)
        })
        .count()
}

fn algebra(cfg: &SuiteConfig) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let runs: [(&str, fn(&mut ChaCha8Rng, usize) -> usize, usize); 4] = [
        ("ring_axioms", ring_axioms, 100),
        ("exp_log", exp_log, 100),
        ("smith_normal_form", smith_forms, 200),
        ("torsion_multiplicativity", torsion_products, 50),
    ];
    let mut detail = serde_json::Map::new();
    let mut pass = true;
    for (name, f, cases) in runs {
        let ok = f(&mut rng, cases);
        pass &= ok == cases;
        detail.insert(name.into(), json!({ "cases": cases, "passed": ok }));
    }
    Ok((pass, Value::Object(detail)))
}
