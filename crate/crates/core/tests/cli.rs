use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const EULER_GKSL: &str = r#"{
  "limit": {"kind": "random_gksl", "d_h": 2, "d_k": 1, "scale": 0.5, "seed": 1},
  "family": "euler",
  "adaptedness": "vacuum",
  "h_exponents": [1, 2, 3, 4, 5, 6],
  "t_max": 1.0,
  "tests": [
    {"bra": {"u": [1, 0]}, "ket": {"u": [0, 1], "f": {"breakpoints": [0, 0.5], "values": [[0.8], [0]]}}},
    {"bra": {"u": [1, [0, 1]], "f": {"breakpoints": [0, 0.25, 1], "values": [[0.3], [[0, -0.6]], [0]]}}, "ket": {"u": [1, 0]}}
  ],
  "a_list": "units",
  "tol": 0.05
}"#;

fn qrw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrw")).args(args).output().expect("run qrw")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn sup_column(csv: &str) -> Vec<f64> {
    let block = csv.split("\nh,sup\n").nth(1).expect("sup block");
    block.lines().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
}

#[test]
fn converge_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "euler_gksl.json", EULER_GKSL);
    let out = dir.path().join("out");
    let res = qrw(&["converge", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("converge.csv")).unwrap();
    assert!(csv.starts_with("h,t,test_id,a_id,walk_re,walk_im,limit_re,limit_im,abs_err\n"));
    let sups = sup_column(&csv);
    assert_eq!(sups.len(), 6);
    assert!(sups.windows(2).all(|w| w[1] < w[0]), "{sups:?}");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("converge.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], serde_json::json!(true));
    assert!(json["surrogate"].as_str().unwrap().contains("norms"));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", EULER_GKSL);
    let mut files = Vec::new();
    for w in ["1", "3"] {
        let out = dir.path().join(format!("w{w}"));
        let res = qrw(&["--workers", w, "--seed", "5", "converge", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(res.status.success());
        files.push((fs::read(out.join("converge.csv")).unwrap(), fs::read(out.join("converge.json")).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn missing_config_names_the_path() {
    let res = qrw(&["converge", "--config", "/nonexistent/sweep.json"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("/nonexistent/sweep.json"));
}

#[test]
fn malformed_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("broken.json", "{ not json"),
        ("shape.json", r#"{"limit": {"kind": "random_gksl", "d_h": 2, "d_k": 1}, "t_max": 1, "tests": [{"bra": {"u": [1]}, "ket": {"u": [1, 0]}}], "a_list": "units"}"#),
        ("grid.json", r#"{"limit": {"kind": "example7", "c": 0}, "family": "example7", "h_grid": [0.1, 0.2], "t_max": 1, "tests": [], "a_list": "units"}"#),
    ] {
        let cfg = write_config(dir.path(), name, text);
        let res = qrw(&["converge", "--config", &cfg]);
        assert_eq!(res.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&res.stderr).contains(name), "{name}");
    }
}

#[test]
fn budget_has_its_own_exit_code() {
    let res = qrw(&["--max-dim", "64", "decompose", "--count", "1", "--n-max", "6"]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("budget"));
}

#[test]
fn example7_reports_pass() {
    let dir = tempfile::tempdir().unwrap();
    let res = qrw(&["example7", "--c", "0", "--h", "0.01", "--tmax", "1", "--out", dir.path().to_str().unwrap()]);
    assert!(res.status.success());
    let text = String::from_utf8_lossy(&res.stdout);
    for name in ["walk2_closed_vs_powers", "walk2_m2_equals_1_plus_h", "walk1_moments_vs_tensor", "limit_moments_formula_vs_doleans"] {
        assert!(text.contains(&format!("PASS {name}")), "{name}");
    }
    assert!(!text.contains("FAIL"));
    assert!(dir.path().join("example7.json").exists());
    let neg = qrw(&["example7", "--c", "-2", "--h", "0.25"]);
    assert!(neg.status.success());
}

#[test]
fn check_subcommands_pass_with_defaults() {
    for args in [&["dilate"][..], &["multhom"], &["decompose"], &["appendix-a"]] {
        let res = qrw(args);
        assert!(res.status.success(), "{args:?}: {}", String::from_utf8_lossy(&res.stdout));
    }
}

#[test]
fn failed_checks_exit_one() {
    // Seed 6 draws an instance that exceeds the displayed third-order estimate.
    let res = qrw(&["--seed", "6", "appendix-a"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stdout).contains("FAIL exact_below_bound"));
}

#[test]
fn reruns_are_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(qrw(&["--seed", "11", "appendix-a", "--out", d.to_str().unwrap()]).status.success());
    }
    assert_eq!(fs::read(a.join("appendix_a.csv")).unwrap(), fs::read(b.join("appendix_a.csv")).unwrap());
    assert_eq!(fs::read(a.join("appendix_a.json")).unwrap(), fs::read(b.join("appendix_a.json")).unwrap());
}
