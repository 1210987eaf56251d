use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use tribody_cli::TrajectoryFile;

fn tribody(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tribody"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Value following `key` on the first line that starts with it.
fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .and_then(|rest| rest.split_whitespace().next())
        .unwrap_or_else(|| panic!("no {key:?} in\n{text}"))
        .parse()
        .unwrap()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

#[test]
fn bounds_table() {
    let o = tribody(&["bounds"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = text.lines().find(|l| l.contains("triangle")).unwrap();
    assert!(row.contains("6.6927"));
    let computed: f64 = row.split_whitespace().last().unwrap().parse().unwrap();
    assert!((computed - 6.6927).abs() < 1e-4);
    assert!(text.lines().any(|l| l.contains("lagrange quarter") && l.contains("4.21617")));
    assert!(text.contains("total-collision bound < test-path total: false"));
    assert!(text.contains("test-path total < 3.5383: true"));
}

#[test]
fn minimize_lagrange_family_without_output_file() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_tribody"))
        .args(["minimize", "--family", "qs3-qe3", "--seed", "lagrange", "--grid", "512"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!((field(&stdout(&o), "action ") - 4.21617).abs() < 5e-3);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn minimize_collinear_family_reproduces_published_action() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "schubart.json");
    let o = tribody(&["minimize", "--family", "qs1-qe1", "--seed", "testpath", "--graded", "--out", &out]);
    assert!(o.status.success());
    let text = stdout(&o);
    let f = TrajectoryFile::read(Path::new(&out)).unwrap();
    assert!((f.metadata.actions["total"] - field(&text, "action ")).abs() < 1e-9);
    assert!(f.metadata.values["a1"] < 1e-3);
    assert!((field(&text, "action ") - 3.43).abs() <= 0.02, "{text}");
}

#[test]
fn jacobi_export_of_the_collinear_minimizer() {
    let dir = TempDir::new().unwrap();
    let json = p(&dir, "s.json");
    let csv = p(&dir, "s.csv");
    assert!(tribody(&["minimize", "--family", "qs1-qe1", "--grid", "512", "--graded", "--out", &json])
        .status
        .success());
    assert!(tribody(&["export", "--input", &json, "--out", &csv, "--jacobi"]).status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let f = TrajectoryFile::read(Path::new(&json)).unwrap();
    assert_eq!(text.lines().count(), f.len() + 1);
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let z1y: f64 = cols[2].parse().unwrap();
        assert!(z1y.abs() < 1e-8);
        if !cols[5].is_empty() {
            let d: f64 = cols[5].parse().unwrap();
            assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&d));
        }
    }
}

#[test]
fn integrate_broucke_henon_returns_after_one_period() {
    let o = tribody(&["integrate", "--state", "broucke-henon", "--t", "4"]);
    assert!(o.status.success());
    let dev = field(&stdout(&o), "period-return deviation ");
    assert!(dev < 1e-3, "deviation {dev}");
}

#[test]
fn shoot_extend_verify_pipeline() {
    let dir = TempDir::new().unwrap();
    let (q, orbit) = (p(&dir, "q.json"), p(&dir, "o.json"));
    let o = tribody(&["shoot", "--out", &q]);
    assert!(o.status.success());
    assert!(field(&stdout(&o), "iterations ") <= 30.0);
    assert!(tribody(&["extend", "--mode", "henon", "--input", &q, "--out", &orbit]).status.success());
    let v = tribody(&["verify", "--input", &orbit]);
    assert!(v.status.success(), "{}", stdout(&v));
    assert!(stdout(&v).lines().all(|l| l.starts_with("PASS")));

    let csv = p(&dir, "o.csv");
    assert!(tribody(&["export", "--input", &orbit, "--out", &csv]).status.success());
    let rows = std::fs::read_to_string(&csv).unwrap().lines().count();
    assert_eq!(rows, TrajectoryFile::read(Path::new(&orbit)).unwrap().len() + 1);
}

#[test]
fn verify_fails_on_the_rounded_published_orbit() {
    let dir = TempDir::new().unwrap();
    let f = p(&dir, "bh.json");
    assert!(tribody(&["integrate", "--state", "broucke-henon", "--t", "4", "--out", &f]).status.success());
    assert_eq!(tribody(&["verify", "--input", &f]).status.code(), Some(3));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let q = p(&dir, "q.json");
    assert!(tribody(&["shoot", "--out", &q]).status.success());
    let text = std::fs::read_to_string(&q).unwrap();
    let truncated = p(&dir, "t.json");
    std::fs::write(&truncated, &text[..text.len() / 3]).unwrap();
    assert_eq!(tribody(&["verify", "--input", &truncated]).status.code(), Some(2));
    assert_eq!(tribody(&["verify", "--input", &p(&dir, "missing.json")]).status.code(), Some(4));
    assert_eq!(tribody(&["minimize", "--family", "nope"]).status.code(), Some(2));
    assert_eq!(tribody(&["minimize", "--family", "qs1-qe1", "--grid", "8"]).status.code(), Some(2));
    // A quarter that misses the boundary conditions is rejected as input.
    assert_eq!(tribody(&["extend", "--mode", "antisymmetric", "--input", &q]).status.code(), Some(2));
}

#[test]
fn schubart_backward_run_stops_at_the_collision() {
    let o = tribody(&["integrate", "--state", "schubart-t1", "--t", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("collision of bodies 1 and 2"));
    assert!((field(&text, "action ") - 3.47).abs() < 0.01);
}

#[test]
fn output_is_deterministic() {
    let a = tribody(&["minimize", "--family", "qs3-qe3", "--seed", "lagrange", "--grid", "128"]);
    let b = tribody(&["minimize", "--family", "qs3-qe3", "--seed", "lagrange", "--grid", "128"]);
    assert_eq!(a.stdout, b.stdout);
}
