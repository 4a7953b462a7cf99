use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const HEADER: &str =
    "k,t,theta,primal,dual_surrogate,gap,delta,thm1_residual,thm2_residual,bound,cggap";

fn fom(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fom"));
    cmd.args(args).env_remove("FOM_TOL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn fom")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

fn run_config(dir: &Path, name: &str, json: &str, env: &[(&str, &str)]) -> (Output, PathBuf) {
    let cfg = write_config(dir, &format!("{name}.json"), json);
    let out = dir.join(name);
    let o = fom(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        env,
    );
    (o, out)
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn slope(out: &Output) -> f64 {
    let text = String::from_utf8_lossy(&out.stdout);
    text.split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| panic!("no slope in {text:?}"))
}

#[test]
fn lasso_smoke_run() {
    let tmp = TempDir::new().unwrap();
    let (o, out) = run_config(
        tmp.path(),
        "smoke",
        r#"{"instance": {"name": "lasso"}, "method": {"kind": "prox-gradient"}, "iterations": 100}"#,
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 100);
    // no conditional-gradient column for a Bregman method
    assert!(rows.iter().all(|r| r.ends_with(',')));
    let s = summary(&out);
    for key in [
        "final_gap",
        "final_primal",
        "iterations",
        "wall_time_ms",
        "violations",
    ] {
        assert!(s.get(key).is_some(), "summary lacks {key}");
    }
    assert_eq!(s["iterations"], 100);
    assert_eq!(s["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn incompatible_config_exits_1() {
    let tmp = TempDir::new().unwrap();
    let (o, _) = run_config(
        tmp.path(),
        "bad",
        r#"{"instance": {"name": "cg-ball"}, "method": {"kind": "prox-gradient"}, "iterations": 10}"#,
        &[],
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("incompatible"));
    let (o, _) = run_config(tmp.path(), "garbled", "{not json", &[]);
    assert_eq!(code(&o), 1);
    assert_eq!(code(&fom(&["frobnicate"], &[])), 1);
}

#[test]
fn understated_constant_exits_2() {
    let tmp = TempDir::new().unwrap();
    let (o, out) = run_config(
        tmp.path(),
        "corrupt",
        r#"{"instance": {"name": "lasso"},
            "method": {"kind": "prox-gradient", "rule": {"kind": "inverse-smoothness"}},
            "iterations": 20, "reference_budget": 0, "constant_scale": {"l": 0.1}}"#,
        &[],
    );
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert!(s["violations"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v["check"] == "descent-slack"));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(code(&fom(&["verify", "--instance", "lasso"], &[])), 0);
    assert_eq!(code(&fom(&["verify", "--instance", "cg-ball"], &[])), 0);
    let halved = fom(
        &["verify", "--instance", "l1-regression", "--m-scale", "0.5"],
        &[],
    );
    assert_eq!(code(&halved), 2);
    assert!(String::from_utf8_lossy(&halved.stdout).contains("FAIL"));
    assert_eq!(code(&fom(&["verify", "--instance", "nope"], &[])), 1);
}

#[test]
fn lasso_rates() {
    let tmp = TempDir::new().unwrap();
    for (kind, limit) in [("fast-gradient", -1.8), ("prox-gradient", -0.9)] {
        let (o, out) = run_config(
            tmp.path(),
            kind,
            &format!(
                r#"{{"instance": {{"name": "lasso"}}, "method": {{"kind": "{kind}"}}, "iterations": 2000}}"#
            ),
            &[],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let trace = out.join("trace.csv");
        let r = fom(&["rates", "--trace", trace.to_str().unwrap()], &[]);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
        let s = slope(&r);
        assert!(s <= limit, "{kind}: slope {s} above {limit}");
    }
}

#[test]
fn subgradient_meets_its_bound() {
    let tmp = TempDir::new().unwrap();
    let (o, out) = run_config(
        tmp.path(),
        "sub",
        r#"{"instance": {"name": "l1-regression"}, "method": {"kind": "prox-subgradient", "c": 1.0},
            "iterations": 40000}"#,
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("trace.csv")).unwrap();
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    let primal: f64 = last[3].parse().unwrap();
    let bound: f64 = last[9].parse().unwrap();
    // planted optimum is zero
    assert!(primal <= bound + 1e-8, "{primal} > {bound}");
}

#[test]
fn traces_are_bit_stable_and_jobs_match_serial() {
    let tmp = TempDir::new().unwrap();
    let a = write_config(
        tmp.path(),
        "a.json",
        r#"{"instance": {"name": "poisson-burg", "seed": 2}, "method": {"kind": "fast-gradient"}, "iterations": 300}"#,
    );
    let b = write_config(
        tmp.path(),
        "b.json",
        r#"{"instance": {"name": "cg-ball"}, "method": {"kind": "conditional-subgradient",
            "schedule": {"kind": "line-search"}}, "iterations": 300}"#,
    );
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    let serial = tmp.path().join("serial");
    let parallel = tmp.path().join("parallel");
    let o = fom(
        &["run", "--config", a, b, "--out", serial.to_str().unwrap()],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = fom(
        &[
            "run",
            "--config",
            a,
            b,
            "--jobs",
            "2",
            "--out",
            parallel.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for stem in ["a", "b"] {
        let x = fs::read(serial.join(stem).join("trace.csv")).unwrap();
        let y = fs::read(parallel.join(stem).join("trace.csv")).unwrap();
        assert_eq!(x, y, "{stem}");
    }
    let cg = fs::read_to_string(serial.join("b").join("trace.csv")).unwrap();
    assert!(
        cg.lines().skip(1).all(|r| !r.ends_with(',')),
        "cggap column filled"
    );
}

#[test]
fn fom_tol_overrides_identity_tolerance() {
    let tmp = TempDir::new().unwrap();
    let cfg = r#"{"instance": {"name": "holder"}, "method": {"kind": "prox-subgradient", "c": 1.0}, "iterations": 50}"#;
    let (o, _) = run_config(tmp.path(), "tight", cfg, &[("FOM_TOL", "1e-300")]);
    assert_eq!(code(&o), 2);
    let (o, _) = run_config(tmp.path(), "loose", cfg, &[("FOM_TOL", "1e-6")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (o, _) = run_config(tmp.path(), "garbage", cfg, &[("FOM_TOL", "tight")]);
    assert_eq!(code(&o), 1);
}
