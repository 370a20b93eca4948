use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use morsekit_core::flow::{validate_f_gradient, FlowScene, Numerics, SceneKind, SceneSpec};
use morsekit_core::morse::{build_morse_complex, induced_map, stability_experiment, MorseSummary, SurfaceMap};
use morsekit_core::novikov::{
    build_novikov_complex, default_regular_value, novikov_induced_map, truncation_tower_check, LiftedMap,
};
use morsekit_core::suite::{run_suite, SuiteConfig};
use morsekit_core::verify::check_torsion_zeta;
use morsekit_core::zeta::{zeta, DEFAULT_RESOLUTION};

#[derive(Parser)]
#[command(name = "morsekit", version, about = "Morse and Novikov complexes, zeta functions and torsion of surface flows")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Opts {
    /// Shipped scene name, or path to a JSON scene spec.
    #[arg(long, global = true)]
    scene: Option<String>,
    /// Regular value of a circle-valued scene (default: middle of the widest gap).
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Precision order of series (the suite uses 8 unless given).
    #[arg(long, global = true)]
    order: Option<usize>,
    #[arg(long, global = true, default_value_t = 1e-3)]
    delta: f64,
    #[arg(long, global = true, default_value_t = 20)]
    trials: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Report directory.
    #[arg(long, global = true, env = "MORSEKIT_OUT", default_value = "morsekit-out")]
    out: PathBuf,
    /// Multiplies the integrator tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the scene's field is an f-gradient.
    Validate,
    #[command(subcommand)]
    Morse(MorseCmd),
    #[command(subcommand)]
    Novikov(NovikovCmd),
    /// Lefschetz numbers and zeta series of the return map.
    Zeta {
        /// Also write the fixed points as CSV.
        #[arg(long)]
        csv: bool,
    },
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Run the full acceptance battery.
    Suite,
}

#[derive(Subcommand)]
enum MorseCmd {
    Build,
    Stability,
    Induced {
        /// identity, half_shift, double_x, double_y
        #[arg(long, default_value = "identity")]
        map: String,
    },
}

#[derive(Subcommand)]
enum NovikovCmd {
    Build,
    /// Compare the truncated boundary with the unrolled cobordisms W_1 .. W_order.
    TowerCheck,
    Induced {
        #[arg(long, default_value = "identity")]
        map: String,
        /// Deck power of the chosen lift.
        #[arg(long, allow_hyphen_values = true)]
        deck: Option<i64>,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    TorsionZeta,
}

const DEFAULT_ORDER: usize = 16;

#[derive(Serialize)]
struct RunConfig {
    command: String,
    scene: Option<SceneSpec>,
    numerics: Option<Numerics>,
    lambda: Option<f64>,
    order: usize,
    delta: f64,
    trials: usize,
    seed: u64,
    tolerance_scale: f64,
    out: String,
}

enum Failure {
    Config(String),
    Module { code: String, message: String },
}

const WRAPPERS: [&str; 8] = ["Flow", "Morse", "Novikov", "Homalg", "Zeta", "Ring", "Verify", "Branch"];

/// Innermost error variant name from the `Debug` form.
fn error_code(debug: &str) -> String {
    let mut s = debug;
    loop {
        let end = s.find(|c: char| !c.is_alphanumeric() && c != '_').unwrap_or(s.len());
        let head = &s[..end];
        let rest = &s[end..];
        if WRAPPERS.contains(&head) && rest.starts_with('(') {
            s = &rest[1..];
        } else if head == "Branch" {
            // struct variant: the wrapped error follows `source: `
            match rest.find("source: ") {
                Some(i) => s = &rest[i + 8..],
                None => return head.to_string(),
            }
        } else {
            return head.to_string();
        }
    }
}

fn module<E: std::fmt::Debug + std::fmt::Display>(e: E) -> Failure {
    Failure::Module { code: error_code(&format!("{e:?}")), message: e.to_string() }
}

struct Outcome {
    name: &'static str,
    result: Value,
    summary: String,
    pass: bool,
}

fn load_scene(opts: &Opts) -> Result<FlowScene, Failure> {
    let Some(name) = &opts.scene else { return Err(Failure::Config("--scene is required".into())) };
    let scene = if name.ends_with(".json") || Path::new(name).is_file() {
        let text = fs::read_to_string(name).map_err(|e| Failure::Config(format!("cannot read {name}: {e}")))?;
        FlowScene::from_json(&text)
    } else {
        FlowScene::named(name)
    }
    .map_err(|e| Failure::Config(e.to_string()))?;
    let n = scene.numerics().with_tolerance_scale(opts.tolerance_scale);
    Ok(scene.with_numerics(n))
}

fn resolve_lambda(opts: &Opts, scene: &FlowScene) -> f64 {
    opts.lambda.unwrap_or_else(|| default_regular_value(scene))
}

fn series_line(label: &str, coeffs: &[i64]) -> String {
    let terms: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
    format!("{label:<8} {}\n", terms.join(" "))
}

fn matrix_lines(out: &mut String, title: &str, rows: &[Vec<i64>]) {
    let _ = writeln!(out, "{title}");
    for r in rows {
        let cells: Vec<String> = r.iter().map(|x| format!("{x:>3}")).collect();
        let _ = writeln!(out, "  [{} ]", cells.join(""));
    }
}

fn validate(scene: &FlowScene) -> Result<Outcome, Failure> {
    let r = validate_f_gradient(scene).map_err(module)?;
    let mut s = format!(
        "{}: condition A {} ({} samples, {} violations), condition B {}\n",
        scene.family(),
        verdict(r.condition_a),
        r.samples,
        r.a_violations,
        verdict(r.condition_b)
    );
    for b in &r.b_checks {
        let _ = writeln!(s, "  {:<10} eigenvalues {:>12.4e} {:>12.4e}  {}", b.id, b.eigenvalues[0], b.eigenvalues[1], verdict(b.pass));
    }
    Ok(Outcome { name: "validate", pass: r.pass, summary: s, result: serde_json::to_value(&r).unwrap() })
}

fn morse_build(scene: &FlowScene) -> Result<Outcome, Failure> {
    let m = build_morse_complex(scene).map_err(module)?;
    let summary = MorseSummary::from(&m);
    let chi: i64 = summary.betti.iter().enumerate().map(|(k, b)| if k % 2 == 0 { *b as i64 } else { -(*b as i64) }).sum();
    let pass = chi == scene.euler_characteristic();
    let mut s = format!("{}: generators {:?}, Betti numbers {:?}\n", m.family, summary.generators, summary.betti);
    for (k, d) in m.incidences().iter().enumerate() {
        matrix_lines(&mut s, &format!("d_{}", k + 1), d);
    }
    let mut result = m.to_json();
    result["euler_characteristic"] = json!(chi);
    Ok(Outcome { name: "morse-build", pass, summary: s, result })
}

fn morse_stability(scene: &FlowScene, opts: &Opts) -> Result<Outcome, Failure> {
    let r = stability_experiment(scene, opts.delta, opts.trials, opts.seed).map_err(module)?;
    let mut s = format!("{}: {}/{} perturbations at delta {} give identical incidences\n", r.family, r.identical, r.trials, r.delta);
    for o in r.outcomes.iter().filter(|o| !o.identical) {
        let _ = writeln!(s, "  seed {}: {}", o.seed, o.error.as_deref().unwrap_or("incidences differ"));
    }
    Ok(Outcome { name: "morse-stability", pass: r.pass, summary: s, result: serde_json::to_value(&r).unwrap() })
}

fn named_map(name: &str) -> Result<SurfaceMap, Failure> {
    SurfaceMap::named(name).ok_or_else(|| Failure::Config(format!("unknown map `{name}`")))
}

fn morse_induced(scene: &FlowScene, map: &str) -> Result<Outcome, Failure> {
    let f = induced_map(&named_map(map)?, scene, scene).map_err(module)?;
    let mut s = format!("{}: chain map induced by {map}\n", scene.family());
    for (k, c) in f.chain_map.components().iter().enumerate() {
        let rows: Vec<Vec<i64>> = (0..c.nrows()).map(|i| c.row(i).to_vec()).collect();
        matrix_lines(&mut s, &format!("degree {k}"), &rows);
    }
    for (k, h) in f.on_homology().iter().enumerate() {
        let rows: Vec<String> = h.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).collect();
        let _ = writeln!(s, "H_{k}: [{}]", rows.join("; "));
    }
    Ok(Outcome { name: "morse-induced", pass: true, summary: s, result: f.to_json() })
}

fn novikov_build(scene: &FlowScene, lambda: f64, order: usize) -> Result<Outcome, Failure> {
    let c = build_novikov_complex(scene, lambda, order).map_err(module)?;
    let h = c.homology().map_err(module)?;
    let mut s = format!("{} at lambda {lambda}, order {order}: generators {:?}\n", c.family, (0..c.complex.num_degrees()).map(|k| c.complex.dim(k)).collect::<Vec<_>>());
    for (k, d) in c.complex.bases().iter().enumerate().skip(1) {
        let m = c.complex.boundary(k);
        for (i, row) in c.complex.basis(k - 1).iter().enumerate() {
            for (j, col) in d.iter().enumerate() {
                let _ = writeln!(s, "  d({col}) -> {row}: {}", m.get(i, j));
            }
        }
    }
    let _ = writeln!(s, "Novikov Betti numbers {:?}", h.ranks);
    let mut result = c.to_json();
    result["homology"] = serde_json::to_value(&h).unwrap();
    result["critical_values"] = scene.critical_points().iter().map(|c| (c.id.clone(), json!(c.value))).collect();
    Ok(Outcome { name: "novikov-build", pass: true, summary: s, result })
}

fn novikov_tower(scene: &FlowScene, lambda: f64, order: usize) -> Result<Outcome, Failure> {
    let mut reports = Vec::new();
    let mut s = format!("{} at lambda {lambda}\n", scene.family());
    for n in 1..=order {
        let r = truncation_tower_check(scene, lambda, n).map_err(module)?;
        let _ = writeln!(s, "  W_{n}: {} entries agree", r.entries_compared);
        reports.push(r);
    }
    let pass = reports.iter().all(|r| r.pass);
    Ok(Outcome { name: "novikov-tower-check", pass, summary: s, result: json!({ "levels": reports }) })
}

fn novikov_induced(scene: &FlowScene, lambda: f64, order: usize, map: &str, deck: Option<i64>) -> Result<Outcome, Failure> {
    let lifted = LiftedMap { map: named_map(map)?, deck };
    let f = novikov_induced_map(&lifted, scene, scene, lambda, order).map_err(module)?;
    let mut s = format!("{} at lambda {lambda}: chain map induced by {map} with deck power {deck:?}\n", scene.family());
    for (k, c) in f.chain_map.components().iter().enumerate() {
        for (i, j, x) in c.triplets() {
            let _ = writeln!(s, "  degree {k} ({i}, {j}): {x}");
        }
    }
    Ok(Outcome { name: "novikov-induced", pass: true, summary: s, result: f.to_json() })
}

fn zeta_cmd(scene: &FlowScene, lambda: f64, order: usize, csv: bool, out: &Path) -> Result<Outcome, Failure> {
    let z = zeta(scene, lambda, order, DEFAULT_RESOLUTION).map_err(module)?;
    let mut s = format!("{}: Lefschetz numbers of the return map\n", z.family);
    for (n, l) in z.counts.iter().enumerate() {
        let _ = writeln!(s, "  n = {:>2}  L = {l}", n + 1);
    }
    s += &series_line("zeta", &z.series.coeffs_i64());
    if !z.reliable {
        s += "some fixed points lie near the boundary of the return map's domain\n";
    }
    if csv {
        let mut text = String::from("n,x,y,derivative,index,reliable\n");
        for f in &z.fixed_points {
            let y = f.at.get(1).map(|y| y.to_string()).unwrap_or_default();
            let _ = writeln!(text, "{},{},{},{},{},{}", f.n, f.at[0], y, f.derivative, f.index, f.reliable);
        }
        write_file(&out.join("fixed_points.csv"), &text)?;
    }
    Ok(Outcome { name: "zeta", pass: z.reliable, summary: s, result: serde_json::to_value(&z).unwrap() })
}

fn verify_cmd(scene: &FlowScene, lambda: f64, order: usize) -> Result<Outcome, Failure> {
    let v = check_torsion_zeta(scene, lambda, order).map_err(module)?;
    let mut s = format!("{}: torsion-zeta identity to order {order}\n", v.family);
    if !v.applicable {
        let _ = writeln!(s, "not applicable: {}", v.diagnostic.as_deref().unwrap_or(""));
    } else {
        for (label, u) in [("w", &v.w), ("zeta", &v.zeta), ("w*zeta", &v.product)] {
            if let Some(u) = u {
                s += &series_line(label, &u.coeffs_i64());
            }
        }
        let _ = writeln!(s, "{}", verdict(v.pass));
    }
    // nothing is asserted for a scene outside the identity's hypotheses
    let pass = v.pass || !v.applicable;
    Ok(Outcome { name: "verify-torsion-zeta", pass, summary: s, result: serde_json::to_value(&v).unwrap() })
}

fn suite(opts: &Opts) -> Result<Outcome, Failure> {
    let cfg = SuiteConfig {
        seed: opts.seed,
        order: opts.order.unwrap_or(SuiteConfig::default().order),
        delta: opts.delta,
        trials: opts.trials,
        tolerance_scale: opts.tolerance_scale,
    };
    let r = run_suite(&cfg);
    let mut s = String::new();
    for c in &r.criteria {
        let _ = writeln!(s, "{:>2}  {:<24} {}", c.id, c.name, verdict(c.pass));
    }
    Ok(Outcome { name: "suite", pass: r.pass, summary: s, result: serde_json::to_value(&r).unwrap() })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate => "validate",
        Command::Morse(MorseCmd::Build) => "morse build",
        Command::Morse(MorseCmd::Stability) => "morse stability",
        Command::Morse(MorseCmd::Induced { .. }) => "morse induced",
        Command::Novikov(NovikovCmd::Build) => "novikov build",
        Command::Novikov(NovikovCmd::TowerCheck) => "novikov tower-check",
        Command::Novikov(NovikovCmd::Induced { .. }) => "novikov induced",
        Command::Zeta { .. } => "zeta",
        Command::Verify(VerifyCmd::TorsionZeta) => "verify torsion-zeta",
        Command::Suite => "suite",
    }
}

fn run(cli: &Cli, config: &mut RunConfig) -> Result<Outcome, Failure> {
    let opts = &cli.opts;
    if let Command::Suite = cli.command {
        return suite(opts);
    }
    let scene = load_scene(opts)?;
    config.scene = Some(scene.spec().clone());
    config.numerics = Some(*scene.numerics());
    let order = config.order;
    let needs_level = matches!(cli.command, Command::Novikov(_) | Command::Zeta { .. } | Command::Verify(_));
    let lambda = if needs_level && scene.kind() == SceneKind::CircleValued {
        let l = resolve_lambda(opts, &scene);
        config.lambda = Some(l);
        l
    } else {
        opts.lambda.unwrap_or(0.5)
    };
    match &cli.command {
        Command::Validate => validate(&scene),
        Command::Morse(MorseCmd::Build) => morse_build(&scene),
        Command::Morse(MorseCmd::Stability) => morse_stability(&scene, opts),
        Command::Morse(MorseCmd::Induced { map }) => morse_induced(&scene, map),
        Command::Novikov(NovikovCmd::Build) => novikov_build(&scene, lambda, order),
        Command::Novikov(NovikovCmd::TowerCheck) => novikov_tower(&scene, lambda, order),
        Command::Novikov(NovikovCmd::Induced { map, deck }) => novikov_induced(&scene, lambda, order, map, *deck),
        Command::Zeta { csv } => zeta_cmd(&scene, lambda, order, *csv, &opts.out),
        Command::Verify(VerifyCmd::TorsionZeta) => verify_cmd(&scene, lambda, order),
        Command::Suite => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = &cli.opts;
    let default_order = if matches!(cli.command, Command::Suite) { SuiteConfig::default().order } else { DEFAULT_ORDER };
    let mut config = RunConfig {
        command: command_name(&cli.command).into(),
        scene: None,
        numerics: None,
        lambda: opts.lambda,
        order: opts.order.unwrap_or(default_order),
        delta: opts.delta,
        trials: opts.trials,
        seed: opts.seed,
        tolerance_scale: opts.tolerance_scale,
        out: opts.out.display().to_string(),
    };
    if let Err(e) = fs::create_dir_all(&opts.out) {
        eprintln!("config error: cannot create {}: {e}", opts.out.display());
        return ExitCode::from(2);
    }
    let outcome = run(&cli, &mut config);
    let (report, name, code) = match &outcome {
        Ok(o) => (json!({ "config": config, "result": o.result, "pass": o.pass }), o.name, if o.pass { 0 } else { 1 }),
        Err(Failure::Config(message)) => {
            eprintln!("config error: {message}");
            return ExitCode::from(2);
        }
        Err(Failure::Module { code, message }) => {
            let err = json!({ "code": code, "message": message });
            eprintln!("{}", serde_json::to_string(&json!({ "error": err })).unwrap());
            (json!({ "config": config, "error": err, "pass": false }), "error", 3)
        }
    };
    let base = config.command.replace(' ', "-");
    let stem = if name == "error" { format!("{base}-error") } else { base };
    let mut text = serde_json::to_string_pretty(&report).unwrap();
    text.push('\n');
    if let Err(Failure::Config(m)) = write_file(&opts.out.join(format!("{stem}.json")), &text) {
        eprintln!("config error: {m}");
        return ExitCode::from(2);
    }
    if let Ok(o) = &outcome {
        print!("{}", o.summary);
        if write_file(&opts.out.join(format!("{stem}.txt")), &o.summary).is_err() {
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code)
}
