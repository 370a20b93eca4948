use morsekit_core::flow::{FlowScene, SceneSpec};
use morsekit_core::zeta::*;

const N: usize = 8;

fn scene(name: &str) -> FlowScene {
    FlowScene::named(name).unwrap()
}

/// Power series of `p / q` with integer coefficients, `q(0) = 1`.
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

#[test]
fn cat_map_counts_follow_trace_recurrence() {
    // tr A^(n+1) = 3 tr A^n - tr A^(n-1), L(A^n) = 2 - tr A^n
    let mut tr = vec![2i64, 3];
    while tr.len() <= N {
        let k = tr.len();
        tr.push(3 * tr[k - 1] - tr[k - 2]);
    }
    let expected: Vec<i64> = (1..=N).map(|n| 2 - tr[n]).collect();
    let z = zeta(&scene("cat_map"), 0.5, N, DEFAULT_RESOLUTION).unwrap();
    assert_eq!(z.counts, expected);
    assert_eq!(&z.counts[..3], &[-1, -5, -16]);
}

#[test]
fn cat_map_zeta_is_rational() {
    let z = zeta(&scene("cat_map"), 0.5, N, DEFAULT_RESOLUTION).unwrap();
    assert_eq!(z.series.coeffs_i64(), divide(&[1, -3, 1], &[1, -2, 1], N + 1));
}

#[test]
fn doubling_zeta_is_rational() {
    let z = zeta(&scene("circle_doubling"), 0.5, N, DEFAULT_RESOLUTION).unwrap();
    assert_eq!(z.counts, (1..=N as u32).map(|n| 1 - 2i64.pow(n)).collect::<Vec<_>>());
    assert_eq!(z.series.coeffs_i64(), divide(&[1, -2], &[1, -1], N + 1));
    assert_eq!(z.fixed_points.iter().filter(|f| f.n == 3).count(), 7);
    assert!(z.fixed_points.iter().all(|f| f.index == -1));
}

#[test]
fn circle_valued_zeta_is_independent_of_the_level() {
    let s = scene("torus_circle_valued");
    let a = zeta(&s, 1.06, N, DEFAULT_RESOLUTION).unwrap();
    let b = zeta(&s, 1.43, N, DEFAULT_RESOLUTION).unwrap();
    assert_eq!(a.counts, vec![1; N]);
    assert_eq!(a.counts, b.counts);
    assert_eq!(a.series, b.series);
    assert!(a.reliable && b.reliable);
    // zeta = 1 / (1 - t)
    assert_eq!(a.series.coeffs_i64(), vec![1; N + 1]);
}

#[test]
fn counts_do_not_depend_on_resolution() {
    let s = scene("torus_circle_valued");
    let a = zeta(&s, 1.06, 4, 1024).unwrap();
    let b = zeta(&s, 1.06, 4, DEFAULT_RESOLUTION).unwrap();
    assert_eq!(a.counts, b.counts);
}

#[test]
fn return_map_has_a_gap_at_the_saddle() {
    let rm = build_return_map(&scene("torus_circle_valued"), 1.06, 1024).unwrap();
    assert_eq!(rm.intervals.len(), 1);
    assert!(rm.samples.iter().any(Option::is_none));
}

#[test]
fn critical_level_is_rejected() {
    let s = scene("torus_circle_valued");
    let v = s.critical("max0").unwrap().value;
    assert!(matches!(zeta(&s, v, N, DEFAULT_RESOLUTION), Err(ZetaError::RegularValueError { .. })));
}

#[test]
fn folded_level_is_reported() {
    let s = scene("torus_circle_valued");
    assert!(matches!(zeta(&s, 0.9, N, DEFAULT_RESOLUTION), Err(ZetaError::LevelNotAGraph(_))));
}

#[test]
fn identity_monodromy_is_degenerate() {
    let s = FlowScene::from_spec(SceneSpec::new("mapping_torus").with("matrix", serde_json::json!([[1, 0], [0, 1]]))).unwrap();
    assert!(matches!(zeta(&s, 0.5, N, DEFAULT_RESOLUTION), Err(ZetaError::DegenerateFixedPoint { .. })));
    assert!(matches!(
        zeta(&scene("trivial_fibration"), 0.5, N, DEFAULT_RESOLUTION),
        Err(ZetaError::DegenerateFixedPoint { .. })
    ));
}

#[test]
fn rotating_fibration_has_no_fixed_points() {
    let z = zeta(&scene("torus_fibration"), 0.5, N, DEFAULT_RESOLUTION).unwrap();
    assert_eq!(z.counts, vec![0; N]);
    assert!(z.series.is_one());
}

#[test]
fn real_valued_scene_has_no_return_map() {
    assert!(matches!(zeta(&scene("sphere_height"), 0.5, N, DEFAULT_RESOLUTION), Err(ZetaError::NotApplicable(_))));
}
