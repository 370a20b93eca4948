use morsekit_core::flow::{FlowScene, SceneSpec};
use morsekit_core::homalg::{mapping_cone, novikov_homology_ranks, torsion, ChainMap};
use morsekit_core::novikov::build_novikov_complex;
use morsekit_core::verify::*;

const N: usize = 8;

fn scene(name: &str) -> FlowScene {
    FlowScene::named(name).unwrap()
}

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

fn mul(p: &[i64], q: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

#[test]
fn cell_structures_are_complexes_of_the_right_euler_characteristic() {
    for name in ["torus_circle_valued", "torus_fibration", "cat_map", "circle_doubling"] {
        for level in 0..2 {
            let c = CellStructure::shipped(&scene(name), N, level).unwrap();
            assert_eq!(c.euler_characteristic(), 0, "{name} level {level}");
        }
    }
    assert!(matches!(CellStructure::shipped(&scene("sphere_height"), N, 0), Err(VerifyError::NoCellStructure(_))));
}

#[test]
fn fibration_comparison_is_the_zero_map() {
    let s = scene("torus_fibration");
    let cells = CellStructure::shipped(&s, N, 0).unwrap();
    let xi = schutz_map(&s, &cells, 0.5).unwrap();
    assert_eq!(xi.chain_map.target().total_dim(), 0);
    assert!(xi.cells.iter().all(|c| c.hits.is_empty()));
}

#[test]
fn circle_valued_comparison_hits_every_generator() {
    let s = scene("torus_circle_valued");
    let cells = CellStructure::shipped(&s, N, 0).unwrap();
    let xi = schutz_map(&s, &cells, 1.06).unwrap();
    for (k, id) in [(1, "saddle0"), (2, "max0")] {
        let hit = xi.cells.iter().any(|c| c.degree == k && c.hits.iter().any(|h| h.0 == id && h.2.abs() == 1));
        assert!(hit, "{id}");
    }
    // exactly one face holds the maximum
    let faces: Vec<_> = xi.cells.iter().filter(|c| c.degree == 2 && !c.hits.is_empty()).collect();
    assert_eq!(faces.len(), 1);
    // cells missing every ascending disc give zero columns
    let empty = xi.cells.iter().filter(|c| c.degree == 1 && c.hits.is_empty()).count();
    assert!(empty > 0);
    let cone = mapping_cone(&xi.chain_map).unwrap();
    assert!(novikov_homology_ranks(&cone).unwrap().iter().all(|&r| r == 0));
}

#[test]
fn circle_valued_w_is_the_boundary_unit() {
    let r = shipped_w(&scene("torus_circle_valued"), 1.06, N, 0).unwrap();
    assert_eq!(r.w.coeffs_i64(), vec![1, -1, 0, 0, 0, 0, 0, 0]);
}

#[test]
fn mapping_torus_w_matches_determinant_product() {
    // prod_k det(1 - t A_k)^((-1)^k) over the one-vertex torus: A_0 = A_2 = 1, A_1 = A
    let r = shipped_w(&scene("cat_map"), 0.5, N + 1, 0).unwrap();
    let num = mul(&[1, -1], &[1, -1]);
    assert_eq!(r.w.coeffs_i64(), divide(&num, &[1, -3, 1], N + 1));
    let r = shipped_w(&scene("circle_doubling"), 0.5, N + 1, 0).unwrap();
    assert_eq!(r.w.coeffs_i64(), divide(&[1, -1], &[1, -2], N + 1));
}

#[test]
fn w_is_invariant_under_subdivision() {
    for (name, lambda) in [("torus_circle_valued", 1.06), ("cat_map", 0.5), ("circle_doubling", 0.5), ("torus_fibration", 0.5)] {
        let s = scene(name);
        let a = shipped_w(&s, lambda, N, 0).unwrap();
        let b = shipped_w(&s, lambda, N, 1).unwrap();
        assert_eq!(a.w, b.w, "{name}");
        assert!(b.cells > a.cells);
    }
}

#[test]
fn w_is_independent_of_the_regular_value() {
    let s = scene("torus_circle_valued");
    assert_eq!(shipped_w(&s, 1.06, N, 0).unwrap().w, shipped_w(&s, 1.43, N, 0).unwrap().w);
}

#[test]
fn identity_comparison_has_trivial_torsion() {
    let c = build_novikov_complex(&scene("torus_circle_valued"), 1.06, N).unwrap();
    let cone = mapping_cone(&ChainMap::identity(&c.complex)).unwrap();
    assert!(torsion(&cone).unwrap().is_one());
}

#[test]
fn torsion_zeta_identity_holds() {
    for (name, lambda) in [("cat_map", 0.5), ("circle_doubling", 0.5), ("torus_circle_valued", 1.06), ("torus_fibration", 0.5)] {
        let v = check_torsion_zeta(&scene(name), lambda, N).unwrap();
        assert!(v.applicable, "{name}");
        assert!(v.pass, "{name}: first mismatch {:?}", v.first_mismatch);
        assert!(v.product.unwrap().is_one());
    }
}

#[test]
fn trivial_monodromy_is_not_applicable() {
    let v = check_torsion_zeta(&scene("trivial_fibration"), 0.5, N).unwrap();
    assert!(!v.applicable);
    assert!(!v.pass);
    assert!(v.diagnostic.unwrap().contains("degenerate"));
    let s = FlowScene::from_spec(SceneSpec::new("mapping_torus").with("matrix", serde_json::json!([[1, 0], [0, 1]]))).unwrap();
    assert!(!check_torsion_zeta(&s, 0.5, N).unwrap().applicable);
}

#[test]
fn cellular_monodromy_models_are_chain_maps() {
    for d in [2, 3, -2] {
        for m in [1, 2, 3] {
            let (_, g) = circle_model(d, m);
            assert!(g.is_ok(), "degree {d}, {m} vertices");
        }
    }
    for a in [[[2, 1], [1, 1]], [[1, 1], [0, 1]], [[0, -1], [1, 0]]] {
        for k in [1, 2, 3] {
            let (_, g) = torus_model(a, k);
            let g = g.unwrap();
            // faces map with total multiplicity det A = 1
            let total: i64 = (0..k * k).map(|i| (0..k * k).map(|j| *g.component(2).get(i, j)).sum::<i64>()).sum();
            assert_eq!(total, (k * k) as i64, "{a:?} on {k} x {k}");
        }
    }
}
