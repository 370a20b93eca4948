use morsekit_core::flow::*;

fn scene(name: &str) -> FlowScene {
    FlowScene::named(name).unwrap()
}

fn counts(s: &FlowScene) -> [usize; 3] {
    [0, 1, 2].map(|k| s.critical_of_index(k).len())
}

#[test]
fn critical_points_match_euler_characteristic() {
    for (name, expected) in [
        ("sphere_height", [1, 0, 1]),
        ("torus_product", [1, 2, 1]),
        ("torus_product_m2", [2, 4, 2]),
        ("genus2_height", [1, 4, 1]),
        ("torus_circle_valued", [0, 1, 1]),
        ("saddle_connection", [1, 2, 1]),
    ] {
        let s = scene(name);
        let c = counts(&s);
        assert_eq!(c, expected, "{name}");
        assert_eq!(c[0] as i64 - c[1] as i64 + c[2] as i64, s.euler_characteristic(), "{name}");
    }
    assert!(scene("torus_fibration").critical_points().is_empty());
}

#[test]
fn unknown_family_is_rejected() {
    assert!(matches!(FlowScene::named("klein_bottle"), Err(FlowError::UnknownFamily(_))));
    let bad = r#"{"family": "torus_product", "params": {"a": -1.0}}"#;
    assert!(FlowScene::from_json(bad).is_err());
}

#[test]
fn scene_json_round_trip() {
    let s = FlowScene::from_json(r#"{"family": "torus_product", "params": {"m": 2}, "overrides": {"rho": 0.02}}"#).unwrap();
    assert_eq!(counts(&s), [2, 4, 2]);
    assert_eq!(s.numerics().rho, 0.02);
}

#[test]
fn gradient_scenes_validate() {
    for name in ["sphere_height", "torus_product", "genus2_height", "torus_circle_valued"] {
        let r = validate_f_gradient(&scene(name)).unwrap();
        assert!(r.pass, "{name}: {r:?}");
        assert!(r.samples > 1000);
    }
}

#[test]
fn negated_field_fails_condition_a() {
    let s = scene("torus_product").with_tweak(FieldTweak::Negate).unwrap();
    let r = validate_f_gradient(&s).unwrap();
    assert!(!r.condition_a);
    assert_eq!(r.a_violations, r.samples);
    assert!(r.a_witness.unwrap().value < 0.0);
}

#[test]
fn rotated_saddle_fails_condition_b() {
    let base = scene("torus_product");
    let c = base.critical_of_index(1)[0].position;
    let s = base.with_tweak(FieldTweak::RotateSaddle { center: c, kappa: 40.0, radius: 0.05 }).unwrap();
    let r = validate_f_gradient(&s).unwrap();
    assert!(!r.condition_b);
    let failing: Vec<_> = r.b_checks.iter().filter(|b| !b.pass).map(|b| b.id.as_str()).collect();
    assert_eq!(failing, vec!["saddle0"]);
    // a mild rotation keeps the form definite
    let s = base.with_tweak(FieldTweak::RotateSaddle { center: c, kappa: 5.0, radius: 0.05 }).unwrap();
    assert!(validate_f_gradient(&s).unwrap().condition_b);
}

#[test]
fn torus_has_eight_separatrices() {
    let s = scene("torus_product");
    let seps = extract_separatrices(&s, None).unwrap();
    assert_eq!(seps.len(), 8);
    for sep in &seps {
        let lift = sep.terminus.critical().expect("ends at a critical point");
        let target = s.critical(&lift.id).unwrap();
        match sep.direction {
            Direction::Descending => assert_eq!(target.index, 0),
            Direction::Ascending => assert_eq!(target.index, 2),
        }
        assert!(sep.values.windows(2).all(|w| match sep.direction {
            Direction::Descending => w[1] <= w[0] + 1e-12,
            Direction::Ascending => w[1] >= w[0] - 1e-12,
        }));
        assert!(sep.arclength.windows(2).all(|w| w[1] > w[0]));
    }
    assert!(check_almost_transversality(&s).unwrap().pass);
}

#[test]
fn saddle_connection_is_detected() {
    let d = check_almost_transversality(&scene("saddle_connection")).unwrap();
    assert!(!d.pass);
    assert!(d.connections.iter().all(|c| c.from.starts_with("saddle") && c.to.id.starts_with("saddle")));
    assert_eq!(d.connections.len(), 4);
}

#[test]
fn genus2_is_almost_transverse() {
    assert!(check_almost_transversality(&scene("genus2_height")).unwrap().pass);
}

#[test]
fn circle_valued_branches_stop_at_levels() {
    let s = scene("torus_circle_valued");
    let saddle = s.critical_of_index(1)[0].clone();
    let seps = extract_separatrices(&s, Some(2.0)).unwrap();
    for sep in seps.iter().filter(|x| x.direction == Direction::Descending) {
        match &sep.terminus {
            Terminus::Level { value, point } => {
                assert!((value - (saddle.value - 2.0)).abs() < 1e-12);
                assert!((s.f(point) - value).abs() < 1e-9);
            }
            t => panic!("descending branch ended at {t:?}"),
        }
    }
}

#[test]
fn csv_has_one_row_per_sample() {
    let seps = extract_separatrices(&scene("torus_product"), None).unwrap();
    let csv = separatrix_csv(&seps);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "origin,direction,branch,x,y,z,f,arclength");
    assert_eq!(lines.count(), seps.iter().map(|s| s.samples.len()).sum::<usize>());
}

#[test]
fn zero_perturbation_is_identity() {
    let s = scene("torus_product");
    let p = perturb(&s, 11, 0.0).unwrap();
    assert!(p.tweaks().is_empty());
    assert_eq!(extract_separatrices(&p, None).unwrap(), extract_separatrices(&s, None).unwrap());
}

#[test]
fn small_perturbation_keeps_critical_set() {
    let s = scene("genus2_height");
    let p = perturb(&s, 5, 1e-3).unwrap();
    for (a, b) in s.critical_points().iter().zip(p.critical_points()) {
        assert_eq!(a.id, b.id);
        assert!((a.position - b.position).norm() < 1e-9);
    }
    let x = P3::new(1.0, 0.0, 0.0);
    let x = p.retract(&(x + V3::new(0.0, 0.3, 0.3)));
    let d = (p.field(&x) - s.field(&x)).norm();
    assert!(d > 0.0 && d <= 1e-3 + 1e-12);
}

#[test]
fn huge_perturbation_loses_validation_for_some_seed() {
    let s = scene("torus_product");
    let lost = (0..10).filter(|&seed| matches!(perturb(&s, seed, 5.0), Err(FlowError::ValidationLost { .. }))).count();
    assert!(lost > 0);
}

#[test]
fn perturbations_are_seed_deterministic() {
    let s = scene("torus_product");
    let a = perturb(&s, 3, 1e-2).unwrap();
    let b = perturb(&s, 3, 1e-2).unwrap();
    let c = perturb(&s, 4, 1e-2).unwrap();
    let x = P3::new(0.3, 0.2, 0.0);
    assert_eq!(a.field(&x), b.field(&x));
    assert_ne!(a.field(&x), c.field(&x));
}

#[test]
fn tolerance_halving_keeps_termini() {
    let s = scene("genus2_height");
    let fine = s.with_numerics(s.numerics().with_tolerance_scale(0.5));
    let t = |s: &FlowScene| extract_separatrices(s, None).unwrap().into_iter().map(|x| x.terminus.critical().cloned()).collect::<Vec<_>>();
    assert_eq!(t(&s), t(&fine));
}
