use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn jacobi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jacobi"))
        .args(args)
        .env_remove("JACOBI_TOLERANCE_PROFILE")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, config: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(config).unwrap()).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn power(kappa: f64) -> Value {
    json!({"family": "power", "params": {"kappa": kappa}})
}

fn moszynski() -> Value {
    json!({"family": "multiple_weights", "params": {"period": 2, "base": power(1.0)}})
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn moszynski_report_has_gap() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "m.json", &json!({"family": moszynski(), "lambda": [-1.0, 0.0, 1.0], "n_max": 20000}));
    let out = dir.path().join("out");
    let o = jacobi(&["analyze", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out.join("report.json"));
    assert_eq!(r["regime"]["regime"], "critical");
    assert!((r["gap"]["lambda_minus"].as_f64().unwrap() + 0.5).abs() < 1e-12);
    assert!((r["gap"]["lambda_plus"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);

    let sweep = r["sweep"].as_array().unwrap();
    assert_eq!(sweep.len(), 3);
    let inside: Vec<bool> = sweep.iter().map(|x| x["inside_gap"].as_bool().unwrap()).collect();
    assert_eq!(inside, [false, true, false]);
    assert!(sweep[1]["exponential_growth"].as_bool().unwrap());
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn power_is_regular_and_selfadjoint() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "p.json", &json!({"family": power(0.7), "lambda": [0.0, 1.5], "n_max": 20000}));
    let out = dir.path().join("out");
    let o = jacobi(&["analyze", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out.join("report.json"));
    assert_eq!(r["regime"]["regime"], "regular");
    assert!(r["regime"]["det_sym_ef"].as_f64().unwrap() > 0.0);
    assert_eq!(r["carleman"]["verdict"], "divergent");
    assert!(r["gap"].is_null());
    for row in r["sweep"].as_array().unwrap() {
        assert!(!row["exponential_growth"].as_bool().unwrap());
    }
}

#[test]
fn degenerate_regime_exits_2() {
    let dir = TempDir::new().unwrap();
    let fam = json!({"family": "power", "params": {"kappa": 0.5, "q": 3.0}});
    let cfg = write_config(dir.path(), "d.json", &json!({"family": fam, "n_max": 2000}));
    let out = dir.path().join("out");
    let o = jacobi(&["analyze", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(read_json(&out.join("report.json"))["regime"]["regime"], "degenerate");
}

#[test]
fn malformed_config_exits_64_without_output() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\"family\": ").unwrap();
    let out = dir.path().join("out");
    for cmd in ["analyze", "trace", "gap"] {
        let o = jacobi(&[cmd, "--config", s(&cfg), "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(64), "{cmd}");
        assert!(!out.exists());
    }
    // semantically invalid: unknown field, n_max too small, bad kappa
    for bad in [
        json!({"family": power(0.5), "nmax": 5000}),
        json!({"family": power(0.5), "n_max": 10}),
        json!({"family": power(1.5)}),
    ] {
        let cfg = write_config(dir.path(), "bad2.json", &bad);
        let o = jacobi(&["analyze", "--config", s(&cfg), "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(64), "{bad}");
        assert!(!out.exists());
    }
}

#[test]
fn usage_errors_exit_64_and_help_exits_0() {
    assert_eq!(jacobi(&["analyze"]).status.code(), Some(64));
    assert_eq!(jacobi(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(jacobi(&["--help"]).status.code(), Some(0));
    assert_eq!(jacobi(&["--version"]).status.code(), Some(0));
}

#[test]
fn tolerance_profile_from_env() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "p.json", &json!({"family": power(0.5), "lambda": [0.0], "n_max": 2000}));
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_jacobi"))
        .args(["gap", "--config", s(&cfg), "--out", s(&out.join("g.json"))])
        .env("JACOBI_TOLERANCE_PROFILE", "bogus")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(64));

    let o = Command::new(env!("CARGO_BIN_EXE_jacobi"))
        .args(["analyze", "--config", s(&cfg), "--out", s(&out)])
        .env("JACOBI_TOLERANCE_PROFILE", "strict")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(read_json(&out.join("report.json"))["tolerance_profile"], "strict");
}

#[test]
fn constant_family_trace_is_one() {
    let dir = TempDir::new().unwrap();
    let fam = json!({"family": "explicit", "params": {"a": [1.0], "b": [0.0], "tail": {"kind": "periodic", "period": 1}}});
    let cfg = write_config(dir.path(), "c.json", &json!({"family": fam, "N": 1, "n_max": 2000}));
    let out = dir.path().join("out");
    let o = jacobi(&["trace", "--config", s(&cfg), "--lambda", "0", "--alpha", "0", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("trace_000.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let f: Vec<f64> = line.split(',').take(3).map(|x| x.parse().unwrap()).collect();
        assert_eq!(f[1] * (2.0 * f[2]).exp(), 1.0, "{line}");
        rows += 1;
    }
    assert!(rows > 10);
    let sum = read_json(&out.join("summary.json"));
    assert_eq!(sum["regime"], "regular");
    assert_eq!(sum["rows"][0]["limit_estimate"].as_f64(), Some(1.0));
}

#[test]
fn trace_sweeps_lambda_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "m.json",
        &json!({"family": moszynski(), "lambda": {"start": -1.0, "stop": 1.0, "step": 0.5}, "n_max": 20000}),
    );
    let out = dir.path().join("out");
    let o = jacobi(&["trace", "--config", s(&cfg), "--out", s(&out), "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sum = read_json(&out.join("summary.json"));
    let rows = sum["rows"].as_array().unwrap();
    let lambdas: Vec<f64> = rows.iter().map(|r| r["lambda"].as_f64().unwrap()).collect();
    assert_eq!(lambdas, [-1.0, -0.5, 0.0, 0.5, 1.0]);
    let csv = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    for i in 0..5 {
        for kind in ["trajectory", "trace", "profile"] {
            assert!(out.join(format!("{kind}_{i:03}.csv")).exists(), "{kind}_{i:03}");
        }
    }
    // λ = 0 lies inside the gap (-1/2, 1/2): generalized eigenvectors grow
    let mid = &rows[2];
    assert_eq!(mid["inside_gap"], true);
    assert_eq!(mid["exponential_growth"], true);
    assert_eq!(rows[4]["exponential_growth"], false);
}

fn gap_of(dir: &Path, family: Value, period: Option<usize>) -> (Option<i32>, Option<Value>) {
    let mut cfg = json!({"family": family, "n_max": 2000});
    if let Some(n) = period {
        cfg["N"] = json!(n);
    }
    let cfg = write_config(dir, "g.json", &cfg);
    let out = dir.join("gap.json");
    let _ = std::fs::remove_file(&out);
    let o = jacobi(&["gap", "--config", s(&cfg), "--out", s(&out)]);
    (o.status.code(), out.exists().then(|| read_json(&out)))
}

#[test]
fn gap_examples() {
    let dir = TempDir::new().unwrap();
    let close = |v: &Value, lo: f64, hi: f64| {
        let g = &v["gap"];
        assert!((g["lambda_minus"].as_f64().unwrap() - lo).abs() < 1e-9, "{g}");
        assert!((g["lambda_plus"].as_f64().unwrap() - hi).abs() < 1e-9, "{g}");
        for c in v["cross_checks"].as_array().unwrap() {
            assert!(c["max_abs_diff"].as_f64().unwrap() < 1e-9, "{c}");
        }
    };

    let additive = json!({"family": "additive_periodic", "params": {"d": [1.0, 0.0], "base": power(1.0)}});
    let (code, v) = gap_of(dir.path(), additive, None);
    assert_eq!(code, Some(0));
    let v = v.unwrap();
    close(&v, -1.0, 1.0);
    // slopes (2, 0): both closed forms apply
    let names: Vec<&str> = v["cross_checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["multiple_weights", "additive_perturbation"]);

    let weights = json!({"family": "multiple_weights", "params": {"period": 3, "base": power(1.0), "q": 1.0}});
    let (code, v) = gap_of(dir.path(), weights, None);
    assert_eq!(code, Some(0));
    let v = v.unwrap();
    close(&v, -1.0 / 6.0, 0.5);
    assert_eq!(v["cross_checks"][0]["name"], "multiple_weights");

    let (code, v) = gap_of(dir.path(), power(0.7), Some(1));
    assert_eq!(code, Some(1));
    assert!(v.is_none());
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "m.json",
        &json!({"family": moszynski(), "lambda": [-0.25, 0.75], "n_max": 5000, "seed": 7}),
    );
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        assert!(jacobi(&["analyze", "--config", s(&cfg), "--out", s(&out), "--jobs", jobs]).status.success());
        assert!(jacobi(&["trace", "--config", s(&cfg), "--out", s(&out), "--jobs", jobs]).status.success());
        ["report.json", "sweep.csv", "summary.json", "summary.csv", "trace_001.csv"]
            .map(|f| std::fs::read(out.join(f)).unwrap())
    };
    assert_eq!(run("a", "1"), run("b", "4"));
}
