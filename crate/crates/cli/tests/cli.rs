use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vortex_cli::config::{self, AnnulusConfig, EquilibriaConfig, GreensTableConfig, SectionConfig, SimulateConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vortex"))
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str], config: Option<&Path>, out: &Path) -> Output {
    let mut cmd = bin();
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.arg("--out").arg(out).args(args).output().expect("binary runs")
}

fn error_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("error line on stderr");
    serde_json::from_str(line).expect("stderr ends with a JSON error")
}

fn write_config(dir: &Path, value: &serde_json::Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, value.to_string()).unwrap();
    path
}

fn load_example(name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(example(name)).unwrap()).unwrap()
}

#[test]
fn bundled_configs_parse() {
    let text = |n: &str| std::fs::read_to_string(example(n)).unwrap();
    config::parse::<SectionConfig>(&text("example_section.json"), "section").unwrap();
    config::parse::<SimulateConfig>(&text("flat_dipole.json"), "simulate").unwrap();
    config::parse::<EquilibriaConfig>(&text("example_equilibria.json"), "equilibria").unwrap();
    config::parse::<GreensTableConfig>(&text("example_robin_table.json"), "greens-table").unwrap();
    config::parse::<AnnulusConfig>(&text("annulus_pair.json"), "annulus").unwrap();
}

#[test]
fn bundled_configs_run() {
    let dir = tempfile::tempdir().unwrap();
    for (file, cmd, artifacts) in [
        ("flat_dipole.json", "simulate", &["trajectory.csv", "summary.json"][..]),
        ("example_equilibria.json", "equilibria", &["equilibria.json"][..]),
        ("example_robin_table.json", "greens-table", &["table.csv"][..]),
        ("annulus_pair.json", "annulus", &["annulus_trajectory.csv", "annulus_summary.json"][..]),
    ] {
        let out = dir.path().join(cmd);
        let o = run(&[cmd], Some(&example(file)), &out);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        for a in artifacts {
            assert!(out.join(a).exists(), "{cmd} did not write {a}");
        }
    }
    let eq: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("equilibria/equilibria.json")).unwrap()).unwrap();
    let kinds: Vec<&str> = eq["equilibria"].as_array().unwrap().iter().map(|e| e["type"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["maximum", "saddle", "saddle", "minimum"]);
    let table = std::fs::read_to_string(dir.path().join("greens-table/table.csv")).unwrap();
    assert!(table.starts_with("x,y,R,Rx,Ry\n"));
    assert_eq!(table.lines().count(), 1 + 32 * 32);
}

#[test]
fn flat_dipole_translates_rigidly() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate"], Some(&example("flat_dipole.json")), dir.path());
    assert!(o.status.success());
    let mut r = csv::Reader::from_path(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["t", "x1", "y1", "x2", "y2", "eta_x", "eta_y", "H", "Hvort", "Hharm"]
    );
    for rec in r.records() {
        let v: Vec<f64> = rec.unwrap().iter().map(|s| s.parse().unwrap()).collect();
        // equal and opposite vortices stay a fixed vertical pair
        assert!((v[1] - v[3]).abs() < 1e-12 && (v[4] - v[2] - 0.02).abs() < 1e-12);
        assert_eq!([v[5], v[6]], [0.0, 0.0]);
    }
}

#[test]
fn reduced_section_run_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load_example("example_section.json");
    cfg["eta_y"] = serde_json::json!([0.0, 0.3]);
    cfg["max_crossings"] = serde_json::json!(100);
    let path = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    let o = run(&["section"], Some(&path), &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let orbits = m["orbits"].as_array().unwrap();
    assert_eq!(orbits.len(), 2);
    for (k, orbit) in orbits.iter().enumerate() {
        assert_eq!(orbit["crossings"], 100);
        assert!(orbit["energy_error"].as_f64().unwrap() < 1e-8);
        assert!(orbit["halt"].is_null());
        let csv = std::fs::read_to_string(out.join(format!("orbit_{k:03}.csv"))).unwrap();
        assert!(csv.starts_with("y,eta_y\n"));
        assert_eq!(csv.lines().count(), 101);
    }
    assert!(orbits[1]["occupancy"].as_f64().unwrap() > orbits[0]["occupancy"].as_f64().unwrap());
}

#[test]
fn missing_lattice_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load_example("example_equilibria.json");
    cfg.as_object_mut().unwrap().remove("lattice");
    let path = write_config(dir.path(), &cfg);
    let o = run(&["equilibria"], Some(&path), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let e = error_json(&o);
    assert_eq!(e["error"]["kind"], "config");
    assert_eq!(e["error"]["key"], "lattice");
    assert_eq!(e["error"]["exit_code"], 2);
}

#[test]
fn degenerate_lattice_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load_example("example_equilibria.json");
    cfg["lattice"] = serde_json::json!({"a": [1.0, 0.0], "b": [2.0, 0.0]});
    let path = write_config(dir.path(), &cfg);
    let o = run(&["equilibria"], Some(&path), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flat_equilibria_search_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load_example("example_equilibria.json");
    cfg.as_object_mut().unwrap().remove("conformal");
    let path = write_config(dir.path(), &cfg);
    let o = run(&["equilibria"], Some(&path), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_json(&o)["error"]["kind"], "numerical");
}

#[test]
fn missing_config_flag_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate"], None, dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn initial_collision_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load_example("flat_dipole.json");
    cfg["vortices"] = serde_json::json!([
        {"x": 0.3, "y": 0.5, "gamma": 1.0},
        {"x": 0.3, "y": 0.5000000001, "gamma": 1.0}
    ]);
    let path = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    let o = run(&["simulate"], Some(&path), &out);
    assert_eq!(o.status.code(), Some(3));
    let e = error_json(&o);
    assert_eq!(e["error"]["kind"], "numerical");
    assert!(e["error"]["message"].as_str().unwrap().contains("collided"), "{e}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load_example("example_section.json");
    cfg["eta_y"] = serde_json::json!([0.1, -0.2, 0.3]);
    cfg["max_crossings"] = serde_json::json!(40);
    let path = write_config(dir.path(), &cfg);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run(&["--threads", "1", "section"], Some(&path), &a).status.success());
    assert!(run(&["--threads", "2", "section"], Some(&path), &b).status.success());
    for name in ["orbit_000.csv", "orbit_001.csv", "orbit_002.csv", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let s1 = dir.path().join("s1");
    let s2 = dir.path().join("s2");
    run(&["annulus"], Some(&example("annulus_pair.json")), &s1);
    run(&["annulus"], Some(&example("annulus_pair.json")), &s2);
    assert_eq!(
        std::fs::read(s1.join("annulus_trajectory.csv")).unwrap(),
        std::fs::read(s2.join("annulus_trajectory.csv")).unwrap()
    );
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify"], None, dir.path());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert!(report["items"].as_array().unwrap().iter().all(|i| i["pass"] == true));
}

#[test]
fn injected_robin_fault_fails_verify() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--inject", "robin-sign"], None, dir.path());
    assert_eq!(o.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("FAIL Robin value at (0, 1/4)")), "{stdout}");
}
