//! Runs `morsekit suite` twice with a fixed seed and prints one line per
//! acceptance criterion; the last one compares the two reports byte for byte.

use std::path::Path;
use std::process::{Command, ExitCode};

use serde_json::Value;

fn run_suite(out: &Path) -> (bool, Vec<u8>) {
    let status = Command::new(env!("CARGO_BIN_EXE_morsekit"))
        .args(["suite", "--seed", "7", "--out"])
        .arg(out)
        .stdout(std::process::Stdio::null())
        .status()
        .expect("morsekit runs");
    (status.success(), std::fs::read(out.join("suite.json")).expect("suite report"))
}

fn main() -> ExitCode {
    let out = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let (ok1, first) = run_suite(&out);
    let (ok2, second) = run_suite(&out);
    let report: Value = serde_json::from_slice(&first).expect("suite report is JSON");
    let mut lines: Vec<(String, bool)> = report["result"]["criteria"]
        .as_array()
        .expect("criteria")
        .iter()
        .map(|c| (format!("{} {}", c["id"], c["name"].as_str().unwrap()), c["pass"] == Value::Bool(true)))
        .collect();
    lines.push(("10 determinism".into(), ok1 == ok2 && first == second));
    let mut all = ok1;
    for (name, pass) in &lines {
        println!("{} {name}", if *pass { "PASS" } else { "FAIL" });
        all &= pass;
    }
    if lines.len() != 10 {
        println!("FAIL expected 10 criteria, found {}", lines.len());
        all = false;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
