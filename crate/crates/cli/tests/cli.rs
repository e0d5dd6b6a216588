use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use levichk_core::levi::check_main_theorem_on;
use levichk_core::problem::load_problem;
use levichk_core::{OrderGrid, ProblemFile};

const BIN: &str = env!("CARGO_BIN_EXE_levichk");

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn all_examples() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(example(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    v.sort();
    v
}

fn levichk(args: &[&str], out: &Path) -> Output {
    Command::new(BIN).args(args).arg("--out").arg(out).output().unwrap()
}

fn run(cmd: &str, problem: &str, out: &Path) -> Output {
    levichk(&[cmd, example(problem).to_str().unwrap()], out)
}

#[test]
fn check_exit_codes_follow_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run("check", "third_order_ex33.json", dir.path());
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = run("check", "third_order_ex33_broken.json", dir.path());
    assert_eq!(bad.status.code(), Some(1));
    let text = String::from_utf8_lossy(&bad.stdout);
    assert!(text.contains("FAIL") && text.contains("d[3,1]"), "{text}");
    assert!(dir.path().join("third_order_ex33_broken.check.json").exists());
}

#[test]
fn usage_errors_and_help() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(levichk(&["frobnicate"], dir.path()).status.code(), Some(64));
    assert_eq!(levichk(&["check"], dir.path()).status.code(), Some(64));
    assert_eq!(Command::new(BIN).arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(Command::new(BIN).arg("--version").output().unwrap().status.code(), Some(0));
    let missing = levichk(&["check", "/nonexistent/problem.json"], dir.path());
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn reports_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for cmd in ["check", "verify", "schur"] {
        run(cmd, "fourth_order_ex44.json", a.path());
        run(cmd, "fourth_order_ex44.json", b.path());
        let name = format!("fourth_order_ex44.{cmd}.json");
        let ra = std::fs::read_to_string(a.path().join(&name)).unwrap();
        let rb = std::fs::read_to_string(b.path().join(&name)).unwrap();
        assert_eq!(ra, rb, "{cmd}");
    }
}

#[test]
fn json_flag_prints_the_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = levichk(&["verify", example("second_order_cos.json").to_str().unwrap(), "--json", "--seed", "7"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "verify");
    assert_eq!(v["seed"], 7);
    assert_eq!(v["input_hash"].as_str().unwrap().len(), 64);
    assert!(v["oracle"].as_array().unwrap().iter().all(|r| r["pass"] == true));
}

#[test]
fn sweep_and_solve_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("sweep", "second_order_talpha.json", dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("second_order_talpha.sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,rho,fitted_q"));
    assert!(lines.count() >= 2);

    let out = run("solve", "second_order_r2.json", dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("second_order_r2.solve.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,norm_c1,norm_c2,aniso"));
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((last[0] - 1.0).abs() < 1e-12 && last.iter().all(|v| v.is_finite()));
}

#[test]
fn gallery_round_trips_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    for path in all_examples() {
        let text = std::fs::read_to_string(&path).unwrap();
        let file = ProblemFile::from_json(&text).unwrap();
        let again = ProblemFile::from_json(&file.to_json()).unwrap();
        assert_eq!(file, again, "{}", path.display());
        let spec = file.into_spec().unwrap();
        assert_eq!(spec, again.into_spec().unwrap());
        let out = levichk(&["verify", path.to_str().unwrap()], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}: {}", path.display(), String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn verdicts_do_not_depend_on_grid_density() {
    for path in all_examples() {
        let spec = load_problem(&path).unwrap();
        let coarse = OrderGrid::with_density(spec.dim, spec.horizon, spec.params.clone(), 17, 9);
        let fine = OrderGrid::with_density(spec.dim, spec.horizon, spec.params.clone(), 33, 17);
        let a = check_main_theorem_on(&spec, &coarse);
        let b = check_main_theorem_on(&spec, &fine);
        assert_eq!(a.overall, b.overall, "{}", path.display());
        let ids = |r: &levichk_core::LeviReport| {
            r.conditions.iter().map(|c| (c.id.clone(), c.result.verdict)).collect::<Vec<_>>()
        };
        assert_eq!(ids(&a), ids(&b), "{}", path.display());
    }
}
