use morsekit_core::flow::FlowScene;
use morsekit_core::morse::SurfaceMap;
use morsekit_core::novikov::*;
use morsekit_core::rings::NovikovSeries;

const N: usize = 8;

fn scene(name: &str) -> FlowScene {
    FlowScene::named(name).unwrap()
}

fn coeffs(s: &NovikovSeries, n: usize) -> Vec<i64> {
    s.window(0, n as i64).iter().map(|c| i64::try_from(c).unwrap()).collect()
}

#[test]
fn circle_valued_boundary_is_one_minus_t() {
    let c = build_novikov_complex(&scene("torus_circle_valued"), 1.06, N).unwrap();
    assert_eq!(c.complex.basis(1), ["saddle0"]);
    assert_eq!(c.complex.basis(2), ["max0"]);
    let table = c.coefficient_table();
    assert_eq!(table[1], vec![vec![vec![1, -1, 0, 0, 0, 0, 0, 0]]]);
    assert!(c.homology().unwrap().is_trivial());
}

#[test]
fn boundary_squares_to_zero_to_order() {
    let c = build_novikov_complex(&scene("torus_circle_valued"), 1.06, N).unwrap();
    let d = &c.complex;
    assert!(d.boundary(1).mul(&d.boundary(2)).is_negligible(&N));
}

#[test]
fn boundary_independent_of_regular_value() {
    let s = scene("torus_circle_valued");
    let a = build_novikov_complex(&s, 1.06, N).unwrap();
    let b = build_novikov_complex(&s, 1.06 + 0.37, N).unwrap();
    assert_eq!(a.coefficient_table(), b.coefficient_table());
}

#[test]
fn regular_value_crossing_a_critical_value_changes_lifts_only() {
    let s = scene("torus_circle_valued");
    let a = build_novikov_complex(&s, 1.06, N).unwrap();
    let b = build_novikov_complex(&s, 0.9, N).unwrap();
    // at 0.9 the maximum's basis lift is one deck step lower, so d gains a factor t
    let da = a.complex.boundary(2).get(0, 0).clone();
    let db = b.complex.boundary(2).get(0, 0).clone();
    assert_eq!(coeffs(&db, N), vec![0, 1, -1, 0, 0, 0, 0, 0]);
    assert_eq!(coeffs(&da.shift(1), N), coeffs(&db, N));
}

#[test]
fn critical_value_is_rejected() {
    let s = scene("torus_circle_valued");
    let v = s.critical("saddle0").unwrap().value;
    assert!(matches!(build_novikov_complex(&s, v + 3.0, N), Err(NovikovError::RegularValueError { .. })));
}

#[test]
fn fibration_gives_zero_complex() {
    let c = build_novikov_complex(&scene("torus_fibration"), 0.5, N).unwrap();
    assert_eq!(c.complex.total_dim(), 0);
}

#[test]
fn real_valued_scene_is_refused() {
    assert!(matches!(build_novikov_complex(&scene("torus_product"), 0.5, N), Err(NovikovError::NotCircleValued(_))));
}

#[test]
fn truncation_tower_matches_unrolled_cobordism() {
    let s = scene("torus_circle_valued");
    for n in 1..=4 {
        let r = truncation_tower_check(&s, 1.06, n).unwrap();
        assert!(r.pass, "n = {n}");
        // no minima: only the 1 x 1 degree-two block is compared
        assert_eq!(r.entries_compared, n * n);
    }
    let r = truncation_tower_check(&s, 1.06, 0).unwrap();
    assert!(r.pass);
    assert_eq!(r.entries_compared, 0);
}

#[test]
fn unrolled_cobordism_is_a_staircase() {
    // W_3: max t^k M bounds t^k s - t^(k+1) s
    let w = unrolled_complex(&scene("torus_circle_valued"), 1.06, 3).unwrap();
    let d = w.boundary(2);
    let rows: Vec<Vec<i64>> = (0..d.nrows()).map(|i| d.row(i).to_vec()).collect();
    assert_eq!(rows, vec![vec![1, 0, 0], vec![-1, 1, 0], vec![0, -1, 1]]);
}

#[test]
fn induced_maps_of_lifts() {
    let s = scene("torus_circle_valued");
    let id = novikov_induced_map(&LiftedMap::new(SurfaceMap::Identity, 0), &s, &s, 1.06, N).unwrap();
    for k in 1..=2 {
        assert_eq!(coeffs(id.chain_map.component(k).get(0, 0), N), vec![1, 0, 0, 0, 0, 0, 0, 0]);
    }
    let deck = novikov_induced_map(&LiftedMap::new(SurfaceMap::Identity, 1), &s, &s, 1.06, N).unwrap();
    for k in 1..=2 {
        assert_eq!(coeffs(deck.chain_map.component(k).get(0, 0), N), vec![0, 1, 0, 0, 0, 0, 0, 0]);
    }
}

#[test]
fn induced_map_of_fiber_doubling() {
    let s = scene("torus_circle_valued");
    let m = novikov_induced_map(&LiftedMap::new(SurfaceMap::named("double_y").unwrap(), 0), &s, &s, 1.06, N).unwrap();
    for k in 1..=2 {
        assert_eq!(coeffs(m.chain_map.component(k).get(0, 0), N), vec![1, 1, 0, 0, 0, 0, 0, 0]);
    }
}

#[test]
fn undeclared_lift_is_ambiguous() {
    let s = scene("torus_circle_valued");
    let m = LiftedMap { map: SurfaceMap::Identity, deck: None };
    assert!(matches!(novikov_induced_map(&m, &s, &s, 1.06, N), Err(NovikovError::LiftAmbiguity)));
}
