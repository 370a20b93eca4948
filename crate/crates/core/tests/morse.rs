use morsekit_core::flow::FlowScene;
use morsekit_core::homalg::{homology, Matrix};
use morsekit_core::morse::*;
use num_rational::BigRational;

fn scene(name: &str) -> FlowScene {
    FlowScene::named(name).unwrap()
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn rows(m: &Matrix<i64>) -> Vec<Vec<i64>> {
    (0..m.nrows()).map(|i| m.row(i).to_vec()).collect()
}

#[test]
fn homology_of_shipped_surfaces() {
    for (name, betti) in [("sphere_height", vec![1, 0, 1]), ("torus_product", vec![1, 2, 1]), ("genus2_height", vec![1, 4, 1])] {
        let m = build_morse_complex(&scene(name)).unwrap();
        let h = m.homology();
        assert_eq!(h.betti(), betti, "{name}");
        assert!(h.is_free());
        let c = &m.complex;
        assert!(c.boundary(1).mul(&c.boundary(2)).is_negligible(&()));
    }
}

#[test]
fn torus_boundaries_vanish() {
    // each extremum receives the two branches of each saddle with opposite signs
    let m = build_morse_complex(&scene("torus_product")).unwrap();
    assert_eq!(m.incidences(), vec![vec![vec![0, 0]], vec![vec![0], vec![0]]]);
}

#[test]
fn torus_m2_boundaries() {
    let m = build_morse_complex(&scene("torus_product_m2")).unwrap();
    assert_eq!(m.generators(1), ["saddle0", "saddle1", "saddle2", "saddle3"]);
    let d = m.incidences();
    // horizontal saddles connect the two minima, vertical ones the two maxima
    assert_eq!(d[0], vec![vec![0, 0, 1, -1], vec![0, 0, -1, 1]]);
    assert_eq!(d[1], vec![vec![1, -1], vec![-1, 1], vec![0, 0], vec![0, 0]]);
    assert_eq!(homology(&m.complex).betti(), vec![1, 2, 1]);
}

#[test]
fn saddle_connection_is_refused() {
    assert!(matches!(build_morse_complex(&scene("saddle_connection")), Err(MorseError::TransversalityFailure(_))));
}

#[test]
fn circle_valued_scene_is_refused() {
    assert!(matches!(build_morse_complex(&scene("torus_circle_valued")), Err(MorseError::NotRealValued(_))));
}

#[test]
fn incidences_survive_tolerance_halving() {
    for name in ["torus_product_m2", "genus2_height"] {
        let s = scene(name);
        let fine = s.with_numerics(s.numerics().with_tolerance_scale(0.5));
        assert_eq!(build_morse_complex(&s).unwrap().incidences(), build_morse_complex(&fine).unwrap().incidences());
    }
}

#[test]
fn stability_at_small_delta() {
    for name in ["torus_product", "genus2_height"] {
        let r = stability_experiment(&scene(name), 1e-3, 20, 2024).unwrap();
        assert_eq!(r.identical, 20, "{name}: {:?}", r.outcomes);
        assert!(r.pass);
    }
}

#[test]
fn stability_at_zero_delta() {
    let r = stability_experiment(&scene("torus_product_m2"), 0.0, 3, 0).unwrap();
    assert!(r.pass);
}

#[test]
fn identity_induces_identity() {
    for name in ["torus_product", "torus_product_m2", "genus2_height", "sphere_height"] {
        let s = scene(name);
        let f = induced_map(&SurfaceMap::Identity, &s, &s).unwrap();
        for (k, c) in f.chain_map.components().iter().enumerate() {
            assert_eq!(c, &Matrix::identity(s.critical_of_index(k).len(), &()), "{name} degree {k}");
        }
    }
}

#[test]
fn half_shift_permutes() {
    let s = scene("torus_product_m2");
    let f = induced_map(&SurfaceMap::named("half_shift").unwrap(), &s, &s).unwrap();
    let swap = vec![vec![0, 1], vec![1, 0]];
    assert_eq!(rows(f.chain_map.component(0)), swap);
    assert_eq!(rows(f.chain_map.component(2)), swap);
    assert_eq!(
        rows(f.chain_map.component(1)),
        vec![vec![0, 1, 0, 0], vec![1, 0, 0, 0], vec![0, 0, 0, 1], vec![0, 0, 1, 0]]
    );
}

#[test]
fn degree_two_map_doubles_top_class() {
    for name in ["torus_product", "torus_product_m2"] {
        let s = scene(name);
        for (map, h1) in [("double_x", [[1, 0], [0, 2]]), ("double_y", [[2, 0], [0, 1]])] {
            let f = induced_map(&SurfaceMap::named(map).unwrap(), &s, &s).unwrap();
            let h = f.on_homology();
            assert_eq!(h[2], vec![vec![q(2)]], "{name} {map}");
            assert_eq!(h[0], vec![vec![q(1)]]);
            let det = &h[1][0][0] * &h[1][1][1] - &h[1][0][1] * &h[1][1][0];
            assert_eq!(det, q(2));
            if name == "torus_product" {
                assert_eq!(h[1], h1.map(|r| r.map(q).to_vec()).to_vec());
            }
        }
    }
}

#[test]
fn composition_on_homology() {
    let s = scene("torus_product_m2");
    let a = induced_map(&SurfaceMap::named("half_shift").unwrap(), &s, &s).unwrap();
    let b = induced_map(&SurfaceMap::named("double_x").unwrap(), &s, &s).unwrap();
    let ab = b.chain_map.compose(&a.chain_map).unwrap();
    let composite = SurfaceMap::Affine { matrix: [[2, 0], [0, 1]], offset: [1.137, 0.0] };
    let direct = induced_map(&composite, &s, &s).unwrap();
    for k in 0..3 {
        assert_eq!(
            morsekit_core::homalg::homology_map(&ab, k),
            morsekit_core::homalg::homology_map(&direct.chain_map, k)
        );
    }
}

#[test]
fn maps_need_flat_charts() {
    let s = scene("genus2_height");
    assert!(matches!(
        induced_map(&SurfaceMap::named("double_x").unwrap(), &s, &s),
        Err(MorseError::UnsupportedMap { .. })
    ));
}
