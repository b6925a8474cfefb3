use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ontic-sim"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .env_remove("ONTIC_SIM_TOLERANCE_SCALE")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Header plus rows as (column name → value) lookups.
fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn field(header: &[String], row: &[String], name: &str) -> f64 {
    let k = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    row[k].parse().unwrap()
}

#[test]
fn measure_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "m.cfg",
        "scenario = measure\nsubject_dim = 2\nborn_weights = 0.7, 0.3\nn_a = 10\nn_e = 10\ngamma_a = 0.5\ngamma_e = 0.5\ndt = 1\n",
    );
    let o = run_in(dir.path(), &["measure", "--config", "m.cfg", "--out", "m.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("measure "), "{}", stdout(&o));

    let (h, rows) = csv(&dir.path().join("m.csv"));
    assert_eq!(rows.len(), 1);
    // coherence √(0.7·0.3) suppressed by e^{-0.5·10} from each of A and E
    let b = (0.21f64).sqrt() * (-10.0f64).exp();
    let offdiag = field(&h, &rows[0], "max_offdiag");
    assert!((offdiag - b).abs() <= 1e-15, "{offdiag} vs {b}");
    // larger eigenvalue of [[0.7, b], [b, 0.3]] against the Born weight 0.7
    let lambda = 0.5 + (0.04 + b * b).sqrt();
    let dev = field(&h, &rows[0], "max_born_deviation");
    assert!((dev - (lambda - 0.7)).abs() <= 1e-13, "{dev}");
    assert!((field(&h, &rows[0], "bound") - 2f64.powi(-10)).abs() < 1e-18);
}

#[test]
fn helix_default_has_one_hundred_rows() {
    let dir = TempDir::new().unwrap();
    let o = run_in(dir.path(), &["helix"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("seed=0"), "{out}");
    let (h, rows) = csv(&dir.path().join("helix.csv"));
    assert_eq!(h, ["t", "index", "theta1", "phi1", "theta2", "phi2"]);
    assert_eq!(rows.len(), 100);
    for r in &rows {
        let (t1, t2) = (field(&h, r, "theta1"), field(&h, r, "theta2"));
        assert!((t1 + t2 - std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(r[1], "0");
    }
}

fn channel_json(kraus_re: &[[f64; 4]]) -> String {
    let ops: Vec<String> = kraus_re
        .iter()
        .map(|k| {
            format!(
                "{{\"re\":[[{},{}],[{},{}]],\"im\":[[0,0],[0,0]]}}",
                k[0], k[1], k[2], k[3]
            )
        })
        .collect();
    format!(
        "{{\"in_space\":[{{\"label\":\"q\",\"dim\":2}}],\"out_space\":[{{\"label\":\"q\",\"dim\":2}}],\"kraus\":[{}]}}",
        ops.join(",")
    )
}

#[test]
fn verify_flags_broken_kraus_set() {
    let dir = TempDir::new().unwrap();
    // amplitude damping with the second operator dropped
    let g: f64 = 0.36;
    write(
        dir.path(),
        "broken.json",
        &channel_json(&[[1.0, 0.0, 0.0, (1.0 - g).sqrt()]]),
    );
    write(dir.path(), "v.cfg", "scenario=verify\nchannel_path=broken.json\n");
    let o = run_in(dir.path(), &["verify", "--config", "v.cfg"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stdout(&o).contains("completeness_defect"));
    let (h, rows) = csv(&dir.path().join("verify.csv"));
    assert_eq!(rows[0][0], "false");
    assert!((field(&h, &rows[0], "completeness_defect") - g).abs() < 1e-12);

    // the complete set passes
    write(
        dir.path(),
        "good.json",
        &channel_json(&[[1.0, 0.0, 0.0, (1.0 - g).sqrt()], [0.0, g.sqrt(), 0.0, 0.0]]),
    );
    write(dir.path(), "v.cfg", "channel_path = good.json\n");
    let o = run_in(dir.path(), &["verify", "--config", "v.cfg", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(v["trace_preserving"], true);
    assert_eq!(v["kraus_operators"], 2);
}

#[test]
fn malformed_channel_file_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "c.json", "{ \"in_space\": ");
    write(dir.path(), "v.cfg", "channel_path=c.json");
    let o = run_in(dir.path(), &["verify", "--config", "v.cfg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_use_documented_exit_codes() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "a.cfg", "subject_dim = 2\nsubject_dim = 3\nmystery = 1\n");
    let o = run_in(dir.path(), &["measure", "--config", "a.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("lines 1 and 2"), "{err}");
    assert!(err.contains("line 3, column 1"), "{err}");

    write(dir.path(), "b.cfg", "points = 1\n");
    let o = run_in(dir.path(), &["helix", "--config", "b.cfg"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let o = run_in(dir.path(), &["measure"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("subject_dim"));

    // no artifact for a rejected config
    assert!(!dir.path().join("helix.csv").exists());
    assert!(!dir.path().join("measure.csv").exists());
}

#[test]
fn scenario_mismatch_is_rejected() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "c.cfg", "scenario = sweep\n");
    let o = run_in(dir.path(), &["helix", "--config", "c.cfg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tolerance_scale_env_is_validated() {
    let dir = TempDir::new().unwrap();
    let o = bin()
        .current_dir(dir.path())
        .arg("helix")
        .env("ONTIC_SIM_TOLERANCE_SCALE", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    let o = bin()
        .current_dir(dir.path())
        .arg("semigroup")
        .env("ONTIC_SIM_TOLERANCE_SCALE", "10")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}

fn scenario_args(name: &str) -> Vec<&str> {
    match name {
        "measure" | "sweep" => vec!["--config", "sd.cfg"],
        "verify" => vec!["--config", "v.cfg"],
        _ => vec![],
    }
}

const SCENARIOS: [&str; 7] = [
    "measure",
    "sweep",
    "semigroup",
    "trajectories",
    "helix",
    "nonlinear",
    "verify",
];

fn prepare(dir: &Path) {
    write(dir, "sd.cfg", "subject_dim = 3\n");
    write(dir, "v.cfg", "channel_path = id.json\n");
    write(dir, "id.json", &channel_json(&[[1.0, 0.0, 0.0, 1.0]]));
}

#[test]
fn outputs_are_byte_identical_for_identical_inputs() {
    let dir = TempDir::new().unwrap();
    prepare(dir.path());
    write(dir.path(), "hop.cfg", "hop_probability = 0.3\n");
    for format in ["csv", "json"] {
        for name in SCENARIOS {
            let mut outputs = Vec::new();
            for round in 0..2 {
                let out = format!("{name}-{round}.{format}");
                let mut args = vec![name, "--seed", "11", "--format", format, "--out", &out];
                args.extend(scenario_args(name));
                let o = run_in(dir.path(), &args);
                assert!(o.status.success(), "{name}: {}", stderr(&o));
                outputs.push(fs::read(dir.path().join(&out)).unwrap());
            }
            assert_eq!(outputs[0], outputs[1], "{name} {format}");
        }
    }
    let mut hops = Vec::new();
    for round in 0..2 {
        let out = format!("hop-{round}.csv");
        let o = run_in(
            dir.path(),
            &["helix", "--config", "hop.cfg", "--seed", "3", "--out", &out],
        );
        assert!(o.status.success());
        hops.push(fs::read(dir.path().join(out)).unwrap());
    }
    assert_eq!(hops[0], hops[1]);
}

#[test]
fn seed_changes_stochastic_output_and_is_printed() {
    let dir = TempDir::new().unwrap();
    let a = run_in(dir.path(), &["trajectories", "--seed", "1", "--out", "a.csv"]);
    let b = run_in(dir.path(), &["trajectories", "--seed", "2", "--out", "b.csv"]);
    assert!(stdout(&a).contains("seed=1"));
    assert!(stdout(&b).contains("seed=2"));
    assert_ne!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );

    // the enumerated measure itself is seed-independent and sums to one
    let (h, rows) = csv(&dir.path().join("a.csv"));
    assert_eq!(rows.len(), 16);
    let total: f64 = rows.iter().map(|r| field(&h, r, "p")).sum();
    assert!((total - 1.0).abs() < 1e-9);
    let freq: f64 = rows.iter().map(|r| field(&h, r, "frequency")).sum();
    assert!((freq - 1.0).abs() < 1e-9);
}

#[test]
fn writes_exactly_the_declared_file() {
    let dir = TempDir::new().unwrap();
    fs::create_dir(dir.path().join("out")).unwrap();
    let o = run_in(dir.path(), &["nonlinear", "--out", "out/w.json", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let names: Vec<_> = fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names, ["w.json"]);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/w.json")).unwrap()).unwrap();
    assert_eq!(v["pair_id"], "bell-vs-product");
    assert!((v["distance_after"].as_f64().unwrap() - 0.5).abs() < 1e-10);
}

#[test]
fn every_scenario_finishes_quickly_at_defaults() {
    let dir = TempDir::new().unwrap();
    prepare(dir.path());
    for name in SCENARIOS {
        let mut args = vec![name];
        args.extend(scenario_args(name));
        let start = Instant::now();
        let o = run_in(dir.path(), &args);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        assert!(
            start.elapsed() < Duration::from_secs(60),
            "{name} took {:?}",
            start.elapsed()
        );
        assert_eq!(stdout(&o).lines().count(), 1, "{name}");
    }
}

#[test]
fn semigroup_defects_by_family() {
    let dir = TempDir::new().unwrap();
    let o = run_in(dir.path(), &["semigroup"]);
    assert!(o.status.success());
    let (h, rows) = csv(&dir.path().join("semigroup.csv"));
    let defect = |name: &str| field(&h, rows.iter().find(|r| r[0] == name).unwrap(), "defect");
    assert!(defect("entangling") > 0.01);
    assert!(defect("factorized") <= 1e-10);
    assert!(defect("refactorizing") <= 1e-8);
}
