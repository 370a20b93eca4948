use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn out_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn morsekit(out: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morsekit")).args(args).arg("--out").arg(out_dir(out)).output().unwrap()
}

fn report(out: &str, stem: &str) -> Value {
    serde_json::from_slice(&std::fs::read(out_dir(out).join(format!("{stem}.json"))).unwrap()).unwrap()
}

#[test]
fn unknown_scene_is_a_config_error() {
    let o = morsekit("unknown", &["validate", "--scene", "klein_bottle"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("klein_bottle"));
}

#[test]
fn critical_level_is_reported() {
    let o = morsekit("critical", &["novikov", "build", "--scene", "torus_circle_valued"]);
    assert!(o.status.success());
    let saddle = report("critical", "novikov-build")["result"]["critical_values"]["saddle0"].as_f64().unwrap();
    let level = (saddle + 2.0).to_string();
    let o = morsekit("critical", &["zeta", "--scene", "torus_circle_valued", "--lambda", &level]);
    assert_eq!(o.status.code(), Some(3));
    let err = report("critical", "zeta-error");
    assert_eq!(err["error"]["code"], "RegularValueError");
    assert!(err["error"]["message"].as_str().unwrap().contains(&level));
}

#[test]
fn verdict_has_the_four_fields() {
    let o = morsekit("verdict", &["verify", "torsion-zeta", "--scene", "circle_doubling", "--order", "6"]);
    assert!(o.status.success());
    let r = report("verdict", "verify-torsion-zeta");
    let v = &r["result"];
    for key in ["w", "zeta", "product", "pass"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["pass"], true);
    assert_eq!(r["config"]["order"], 6);
    assert_eq!(r["config"]["scene"]["params"]["degree"], 2);
}

#[test]
fn config_is_recorded_and_reports_repeat() {
    let args = ["morse", "stability", "--scene", "torus_product", "--trials", "4", "--seed", "11", "--delta", "0.002"];
    assert!(morsekit("repeat", &args).status.success());
    let first = std::fs::read(out_dir("repeat").join("morse-stability.json")).unwrap();
    assert!(morsekit("repeat", &args).status.success());
    assert_eq!(first, std::fs::read(out_dir("repeat").join("morse-stability.json")).unwrap());
    let r = report("repeat", "morse-stability");
    assert_eq!(r["config"]["seed"], 11);
    assert_eq!(r["config"]["trials"], 4);
    assert_eq!(r["result"]["identical"], 4);
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = out_dir("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_morsekit"))
        .args(["morse", "build", "--scene", "sphere_height"])
        .env("MORSEKIT_OUT", &dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.join("morse-build.json").is_file());
    assert!(String::from_utf8_lossy(&o.stdout).contains("Betti numbers [1, 0, 1]"));
}
