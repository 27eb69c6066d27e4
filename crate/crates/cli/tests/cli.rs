use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

use adq_core::io::{self, Body};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn adq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adq")).args(args).output().expect("run adq")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value_after(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .and_then(|rest| rest.split_whitespace().last())
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| panic!("no `{key}` line in {text}"))
}

fn polytope(path: &std::path::Path) -> adq_core::HPolytope {
    match io::parse_body(&std::fs::read_to_string(path).unwrap()).unwrap().0 {
        Body::Polytope(p) => p,
        Body::Ball(_) => panic!("expected polytope"),
    }
}

#[test]
fn symmetric_octagon_solve() {
    let dir = tempfile::tempdir().unwrap();
    let body = dir.path().join("oct.bf");
    let report = dir.path().join("oct.json");
    let o = adq(&[
        "solve", "--measure", fixture("cross8.mf").to_str().unwrap(), "--p", "0", "--m", "1", "--symmetric",
        "--out", body.to_str().unwrap(), "--report", report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let p = polytope(&body);
    let t = p.supports()[0];
    assert!(p.supports().iter().all(|s| (s - t).abs() < 1e-6 * t));
    let doc = io::parse_report(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(doc.measure_residual.unwrap() <= 1e-2);
    assert_eq!(doc.status, "converged");
}

#[test]
fn triangle_solve_writes_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let body = dir.path().join("tri.bf");
    let o = adq(&["solve", "--measure", fixture("tri.mf").to_str().unwrap(), "--p", "3", "--m", "1", "--out", body.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let p = polytope(&body);
    assert_eq!(p.vertices().len(), 3);
}

#[test]
fn solve_exit_codes() {
    let o = adq(&["solve", "--measure", fixture("hemi.mf").to_str().unwrap(), "--p", "3", "--m", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("witness [-0.707"));

    let o = adq(&["solve", "--measure", fixture("tri.mf").to_str().unwrap(), "--p", "2"]);
    assert_eq!(o.status.code(), Some(3));

    let cross = fixture("cross.mf");
    let o = adq(&["solve", "--measure", cross.to_str().unwrap(), "--p", "0", "--symmetric"]);
    assert_eq!(o.status.code(), Some(1));
    let o = adq(&["solve", "--measure", cross.to_str().unwrap(), "--p", "0", "--symmetric", "--force"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("flag: concentration-override"));
}

#[test]
fn budget_exhaustion_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let mf = dir.path().join("five.mf");
    let atoms: Vec<_> = [0.3f64, 1.4, 2.2, 3.9, 5.1]
        .iter()
        .map(|a| adq_core::UnitVector::from_angle(*a))
        .collect();
    let mu = adq_core::DiscreteMeasure::new(atoms, vec![1.0, 2.0, 0.5, 1.5, 1.0]).unwrap();
    std::fs::write(&mf, io::measure_to_string(&mu)).unwrap();
    let report = dir.path().join("r.json");
    let o = adq(&["solve", "--measure", mf.to_str().unwrap(), "--p", "3", "--max-iters", "1", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let doc = io::parse_report(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc.status, "budget-exhausted");
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let o = adq(&["solve", "--measure", fixture("tri.mf").to_str().unwrap(), "--p", "4", "--seed", "7", "--report", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn eval_examples() {
    let o = adq(&["eval", "psi", "--body", fixture("square.bf").to_str().unwrap(), "--m", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("seed=0") && text.contains("grassmann=4096"));
    assert!((value_after(&text, "psi") - 16.0 / PI).abs() < 5e-3);

    let o = adq(&["eval", "psi", "--body", fixture("ball3.fixture").to_str().unwrap(), "--m", "2"]);
    assert!((value_after(&stdout(&o), "psi") - PI.powi(3)).abs() < 1e-3);

    let o = adq(&["eval", "atoms", "--body", fixture("square.bf").to_str().unwrap(), "--m", "1", "--p", "0"]);
    let text = stdout(&o);
    let masses: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with(|c: char| c.is_ascii_digit()))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(masses.len(), 4);
    assert!(masses.iter().all(|a| (a - 4.0 / PI).abs() < 1e-3));

    let o = adq(&["eval", "vq", "--body", fixture("square.bf").to_str().unwrap()]);
    assert!((value_after(&stdout(&o), "vq") - 4.0).abs() < 1e-4);
}

#[test]
fn eval_radial_table_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ib.csv");
    let o = adq(&["eval", "ibody", "--body", fixture("cube.bf").to_str().unwrap(), "--directions", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.starts_with("ux,uy,uz,value"));
}

#[test]
fn malformed_body_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.bf");
    std::fs::write(&bad, "{\"format\": \"adq-body\", \"version\": 1, \"kind\": \"polytope\", \"n\": \"two\"}").unwrap();
    let o = adq(&["eval", "psi", "--body", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n"));
}

#[test]
fn export_cube_and_square() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("cube.obj");
    let o = adq(&["export", "--body", fixture("cube.bf").to_str().unwrap(), "--out", obj.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 8);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 12);
    let mesh = io::parse_obj(&text).unwrap();
    assert!((mesh.volume() - 8.0).abs() < 1e-9);

    let o = adq(&["export", "--body", fixture("square.bf").to_str().unwrap(), "--out", dir.path().join("sq.obj").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let csv = dir.path().join("sq.csv");
    let o = adq(&["export", "--body", fixture("square.bf").to_str().unwrap(), "--format", "csv", "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), 5);
}

#[test]
fn verify_filter() {
    let o = adq(&["verify", "--filter", "admissibility"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS"));
    let o = adq(&["verify", "--filter", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(1));
}
